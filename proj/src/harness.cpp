#include "agmcts/harness.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <iomanip>
#include <istream>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

namespace agmcts {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Config

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& field, const std::string& msg) {
        throw ConfigError(field + ": " + msg);
    };
    const auto names = domain_names();
    if (std::find(names.begin(), names.end(), domain) == names.end()) {
        fail("domain", "unknown domain '" + domain + "'");
    }
    parse_solver(solver);
    if (seeds < 1) fail("seeds", "must be >= 1");
    if (n_sims < 0) fail("n_sims", "must be >= 0");
    if (budget_multipliers.empty()) fail("budget_multipliers", "must not be empty");
    for (double m : budget_multipliers) {
        if (!(m > 0.0 && m <= 1.0)) fail("budget_multipliers", "entries must lie in (0, 1]");
    }
    if (inference_particles < 0) fail("inference_particles", "must be >= 0");
    if (workers < 0) fail("workers", "must be >= 0");
    resolved_solver_config().validate();
}

SolverConfig ExperimentConfig::resolved_solver_config() const {
    SolverConfig c = default_solver_config(domain, parse_solver(solver));
    apply_solver_overrides(c, solver_config);
    if (n_sims > 0) c.n_sims = n_sims;
    return c;
}

void to_json(json& j, const ExperimentConfig& c) {
    j = json{{"domain", c.domain},
             {"solver", c.solver},
             {"n_sims", c.n_sims},
             {"budget_multipliers", c.budget_multipliers},
             {"seed_base", c.seed_base},
             {"seeds", c.seeds},
             {"inference_particles", c.inference_particles},
             {"workers", c.workers},
             {"solver_config", c.solver_config}};
}

void from_json(const json& j, ExperimentConfig& c) {
    static const std::set<std::string> known{"domain", "solver", "n_sims",
                                             "budget_multipliers", "seed_base", "seeds",
                                             "inference_particles", "workers", "solver_config"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.count(it.key())) throw ConfigError(it.key() + ": unknown field");
    }
    try {
        if (j.contains("domain")) c.domain = j.at("domain").get<std::string>();
        if (j.contains("solver")) c.solver = j.at("solver").get<std::string>();
        if (j.contains("n_sims")) c.n_sims = j.at("n_sims").get<int>();
        if (j.contains("budget_multipliers")) {
            c.budget_multipliers = j.at("budget_multipliers").get<std::vector<double>>();
        }
        if (j.contains("seed_base")) c.seed_base = j.at("seed_base").get<std::uint64_t>();
        if (j.contains("seeds")) c.seeds = j.at("seeds").get<int>();
        if (j.contains("inference_particles")) {
            c.inference_particles = j.at("inference_particles").get<int>();
        }
        if (j.contains("workers")) c.workers = j.at("workers").get<int>();
        if (j.contains("solver_config")) c.solver_config = j.at("solver_config");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

namespace {

std::string update_name(UpdateMode m) { return m == UpdateMode::Exact ? "exact" : "linearized"; }

UpdateMode parse_update(const std::string& s) {
    if (s == "exact") return UpdateMode::Exact;
    if (s == "linearized") return UpdateMode::Linearized;
    throw ConfigError("solver_config.update: expected 'exact' or 'linearized'");
}

double json_double(const json& v) {
    // inf is not representable in JSON; accept it as a string.
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "Infinity") return kInf;
        return std::stod(s);
    }
    return v.get<double>();
}

}  // namespace

json solver_config_to_json(const SolverConfig& c) {
    auto num = [](double x) -> json {
        if (std::isinf(x)) return "inf";
        return x;
    };
    return json{{"c", c.c},
                {"k_a", c.k_a},
                {"alpha_a", c.alpha_a},
                {"k_o", c.k_o},
                {"alpha_o", c.alpha_o},
                {"n_sims", c.n_sims},
                {"max_depth", c.max_depth},
                {"discount", c.discount},
                {"particles", c.particles},
                {"k_rollout", c.k_rollout},
                {"k_opt", c.k_opt},
                {"lr", c.lr},
                {"t_min", c.t_min},
                {"t_max", num(c.t_max)},
                {"t_add", c.t_add},
                {"t_del", c.t_del},
                {"k_child_min", c.k_child_min},
                {"k_child_visits", c.k_child_visits},
                {"k_belief", c.k_belief},
                {"k_obs", c.k_obs},
                {"k_reward", c.k_reward},
                {"update", update_name(c.update)},
                {"decay", c.decay},
                {"classic_returns", c.classic_returns},
                {"select_by_visits", c.select_by_visits},
                {"seed", c.seed}};
}

void apply_solver_overrides(SolverConfig& c, const json& j) {
    if (j.is_null()) return;
    if (!j.is_object()) throw ConfigError("solver_config: expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        const json& v = it.value();
        try {
            if (k == "c") c.c = json_double(v);
            else if (k == "k_a") c.k_a = json_double(v);
            else if (k == "alpha_a") c.alpha_a = json_double(v);
            else if (k == "k_o") c.k_o = json_double(v);
            else if (k == "alpha_o") c.alpha_o = json_double(v);
            else if (k == "n_sims") c.n_sims = v.get<int>();
            else if (k == "max_depth") c.max_depth = v.get<int>();
            else if (k == "discount") c.discount = json_double(v);
            else if (k == "particles") c.particles = v.get<int>();
            else if (k == "k_rollout") c.k_rollout = v.get<int>();
            else if (k == "k_opt") c.k_opt = v.get<int>();
            else if (k == "lr") c.lr = json_double(v);
            else if (k == "t_min") c.t_min = json_double(v);
            else if (k == "t_max") c.t_max = json_double(v);
            else if (k == "t_add") c.t_add = json_double(v);
            else if (k == "t_del") c.t_del = json_double(v);
            else if (k == "k_child_min") c.k_child_min = v.get<int>();
            else if (k == "k_child_visits") c.k_child_visits = v.get<int>();
            else if (k == "k_belief") c.k_belief = v.get<int>();
            else if (k == "k_obs") c.k_obs = v.get<int>();
            else if (k == "k_reward") c.k_reward = v.get<int>();
            else if (k == "update") c.update = parse_update(v.get<std::string>());
            else if (k == "decay") c.decay = v.get<bool>();
            else if (k == "classic_returns") c.classic_returns = v.get<bool>();
            else if (k == "select_by_visits") c.select_by_visits = v.get<bool>();
            else if (k == "seed") c.seed = v.get<std::uint64_t>();
            else throw ConfigError("solver_config." + k + ": unknown field");
        } catch (const json::exception& e) {
            throw ConfigError("solver_config." + k + ": " + e.what());
        }
    }
}

void set_dotted(json& j, const std::string& path, const std::string& value) {
    json parsed;
    try {
        parsed = json::parse(value);
    } catch (const json::exception&) {
        parsed = value;  // bare string
    }
    json* cur = &j;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot - start);
        if (key.empty()) throw ConfigError("bad dotted path '" + path + "'");
        if (dot == std::string::npos) {
            (*cur)[key] = parsed;
            return;
        }
        if (!cur->contains(key) || !(*cur)[key].is_object()) (*cur)[key] = json::object();
        cur = &(*cur)[key];
        start = dot + 1;
    }
}

// ---------------------------------------------------------------------------
// Episodes

ResultRow run_episode(const ProblemModel& model, SolverKind solver, const SolverConfig& cfg,
                      std::uint64_t seed, const EpisodeOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto& info = model.info();
    ResultRow row;
    row.domain = info.name;
    row.solver = solver_name(solver);
    row.n_sims = cfg.n_sims;
    row.seed = seed;

    // Environment and planner draw from separate streams so that solvers
    // facing the same seed see the same initial state.
    Rng env(seed);
    SolverConfig scfg = cfg;
    scfg.seed = splitmix64(seed ^ 0x9e3779b97f4a7c15ULL);
    PlanningSession session(model, scfg, solver);
    const double gamma = info.discount;
    const int horizon = info.horizon;
    const int max_depth = cfg.max_depth < 0 ? horizon : cfg.max_depth;

    try {
        State s = model.sample_initial_state(env);
        ParticleBelief filter;
        const int jpf = opt.inference_particles > 0 ? opt.inference_particles : cfg.particles;
        if (info.has_observations) {
            std::vector<State> ps;
            ps.reserve(static_cast<std::size_t>(jpf));
            for (int i = 0; i < jpf; ++i) ps.push_back(model.sample_initial_state(env));
            filter = ParticleBelief::uniform(std::move(ps));
        }
        double disc = 1.0;
        for (int t = 0; t < horizon; ++t) {
            if (model.is_terminal(s)) break;
            const int depth = std::min(max_depth, horizon - t);
            ParticleBelief root;
            if (info.has_observations) {
                root = subsample(filter, static_cast<std::size_t>(cfg.particles), env);
            } else {
                root = ParticleBelief::point(s);
            }
            const Action a = session.plan(root, depth);
            row.stats += session.stats();
            if (opt.check_invariants) {
                const auto bad = session.tree().check_invariants();
                if (!bad.empty()) throw TreeError("invariant violated: " + bad.front());
            }
            if (opt.record_actions) row.actions.push_back(a);
            auto tr = model.sample_transition(s, a, env);
            row.discounted_return += disc * tr.reward;
            disc *= gamma;
            s = tr.next;
            ++row.steps;
            if (info.has_observations) {
                const Observation o = model.sample_observation(s, env);
                const PropagatedBelief bm = propagate(filter, a, model, env, false);
                try {
                    filter = reweight(bm.as_belief(), o, model);
                } catch (const DegenerateBelief&) {
                    // Every particle contradicts the observation: keep the
                    // prior prediction rather than abort the episode.
                    filter = bm.as_belief();
                }
                if (effective_sample_size(filter.weights) < 0.5 * static_cast<double>(jpf)) {
                    filter = systematic_resample(filter, env);
                }
            }
        }
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

// ---------------------------------------------------------------------------
// CSV

std::string csv_header() {
    return "domain,solver,n_sims,seed,discounted_return,steps,wall_seconds,sims,gradient_steps,"
           "action_updates,force_samples,prunes,error";
}

namespace {

std::string fmt17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch == '\n' ? ' ' : ch;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (in_quotes) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (ch == '"') {
                in_quotes = false;
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            in_quotes = true;
        } else if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

std::string csv_row(const ResultRow& r) {
    std::ostringstream os;
    os << r.domain << ',' << r.solver << ',' << r.n_sims << ',' << r.seed << ','
       << fmt17(r.discounted_return) << ',' << r.steps << ',' << fmt17(r.wall_seconds) << ','
       << r.stats.sims << ',' << r.stats.gradient_steps << ',' << r.stats.action_updates << ','
       << r.stats.force_samples << ',' << r.stats.prunes << ',' << quote(r.error);
    return os.str();
}

std::vector<ResultRow> read_csv(std::istream& in) {
    std::vector<ResultRow> rows;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            header = false;
            if (line.rfind("domain,", 0) == 0) continue;
        }
        const auto f = split_csv_line(line);
        if (f.size() < 12) throw ConfigError("malformed CSV row: " + line);
        ResultRow r;
        r.domain = f[0];
        r.solver = f[1];
        r.n_sims = std::stoi(f[2]);
        r.seed = std::stoull(f[3]);
        r.discounted_return = std::stod(f[4]);
        r.steps = std::stoi(f[5]);
        r.wall_seconds = std::stod(f[6]);
        r.stats.sims = std::stoll(f[7]);
        r.stats.gradient_steps = std::stoll(f[8]);
        r.stats.action_updates = std::stoll(f[9]);
        r.stats.force_samples = std::stoll(f[10]);
        r.stats.prunes = std::stoll(f[11]);
        if (f.size() > 12) r.error = f[12];
        rows.push_back(std::move(r));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Sweeps

int default_workers() {
    if (const char* env = std::getenv("AGMCTS_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg, std::ostream* out,
                                 const std::set<RowKey>& skip) {
    cfg.validate();
    const ModelPtr model = make_domain(cfg.domain);
    const SolverKind kind = parse_solver(cfg.solver);
    const SolverConfig base = cfg.resolved_solver_config();
    EpisodeOptions eo;
    eo.inference_particles = cfg.inference_particles > 0
                                 ? cfg.inference_particles
                                 : default_inference_particles(cfg.domain);

    struct Job {
        SolverConfig scfg;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (double m : cfg.budget_multipliers) {
        SolverConfig sc = base;
        sc.n_sims = std::max(1, static_cast<int>(std::lround(m * base.n_sims)));
        for (int i = 0; i < cfg.seeds; ++i) {
            const std::uint64_t seed = episode_seed(cfg.seed_base, static_cast<std::uint64_t>(i));
            if (skip.count(RowKey{cfg.domain, solver_name(kind), sc.n_sims, seed})) continue;
            jobs.push_back({sc, seed});
        }
    }

    std::vector<ResultRow> rows(jobs.size());
    std::vector<unsigned char> ready(jobs.size(), 0);
    std::size_t next_to_write = 0;
    std::mutex mu;
    std::atomic<std::size_t> next_job{0};

    auto worker = [&]() {
        while (true) {
            const std::size_t i = next_job.fetch_add(1);
            if (i >= jobs.size()) return;
            ResultRow r = run_episode(*model, kind, jobs[i].scfg, jobs[i].seed, eo);
            std::lock_guard<std::mutex> lock(mu);
            rows[i] = std::move(r);
            ready[i] = 1;
            // Rows leave in job order regardless of completion order.
            while (next_to_write < jobs.size() && ready[next_to_write]) {
                if (out) *out << csv_row(rows[next_to_write]) << '\n' << std::flush;
                ++next_to_write;
            }
        }
    };
    const int nw = std::max(1, std::min<int>(cfg.workers > 0 ? cfg.workers : default_workers(),
                                             static_cast<int>(std::max<std::size_t>(jobs.size(), 1))));
    if (nw == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int w = 0; w < nw; ++w) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Summaries

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
    std::map<std::tuple<std::string, std::string, int>, std::vector<double>> groups;
    for (const auto& r : rows) {
        if (!r.error.empty()) continue;
        groups[{r.domain, r.solver, r.n_sims}].push_back(r.discounted_return);
    }
    std::vector<SummaryRow> out;
    for (const auto& [key, xs] : groups) {
        SummaryRow s;
        std::tie(s.domain, s.solver, s.n_sims) = key;
        s.n = static_cast<int>(xs.size());
        s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / s.n;
        if (s.n > 1) {
            double ss = 0.0;
            for (double x : xs) ss += (x - s.mean) * (x - s.mean);
            s.sem = std::sqrt(ss / (s.n - 1)) / std::sqrt(static_cast<double>(s.n));
        }
        out.push_back(s);
    }
    return out;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::ostringstream os;
    os << "domain,solver,n_sims,n,mean,sem\n";
    for (const auto& r : rows) {
        os << r.domain << ',' << r.solver << ',' << r.n_sims << ',' << r.n << ',' << fmt17(r.mean)
           << ',' << fmt17(r.sem) << '\n';
    }
    return os.str();
}

std::string summary_table(const std::vector<SummaryRow>& rows) {
    std::ostringstream os;
    os << std::left << std::setw(20) << "domain" << std::setw(8) << "solver" << std::right
       << std::setw(8) << "n_sims" << std::setw(7) << "n" << std::setw(12) << "mean"
       << std::setw(10) << "sem" << '\n';
    for (const auto& r : rows) {
        os << std::left << std::setw(20) << r.domain << std::setw(8) << r.solver << std::right
           << std::setw(8) << r.n_sims << std::setw(7) << r.n << std::setw(12) << std::fixed
           << std::setprecision(3) << r.mean << std::setw(10) << std::setprecision(3) << r.sem
           << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Cross-entropy tuning

CeResult ce_optimize(const std::vector<CeParam>& params,
                     const std::function<double(const std::vector<double>&)>& objective,
                     const CeOptions& opt) {
    if (params.empty()) throw ConfigError("ce: no parameters");
    if (opt.elites < 1 || opt.elites > opt.samples) throw ConfigError("ce: bad elite count");
    const Eigen::Index d = static_cast<Eigen::Index>(params.size());
    Eigen::VectorXd mu(d);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        mu[i] = params[i].mean;
        cov(i, i) = params[i].sd * params[i].sd;
    }
    Rng rng(opt.seed);
    CeResult res;

    for (int it = 0; it < opt.iterations; ++it) {
        Eigen::MatrixXd chol;
        if (opt.full_covariance) {
            Eigen::LLT<Eigen::MatrixXd> llt(cov + 1e-12 * Eigen::MatrixXd::Identity(d, d));
            chol = llt.matrixL();
        } else {
            chol = cov.diagonal().cwiseMax(0.0).cwiseSqrt().asDiagonal();
        }
        std::vector<Eigen::VectorXd> xs;
        std::vector<double> fs;
        for (int k = 0; k < opt.samples; ++k) {
            Eigen::VectorXd x(d);
            bool ok = false;
            for (int tries = 0; tries < opt.max_redraws && !ok; ++tries) {
                Eigen::VectorXd z(d);
                for (Eigen::Index i = 0; i < d; ++i) z[i] = rng.normal();
                x = mu + chol * z;
                ok = true;
                for (Eigen::Index i = 0; i < d; ++i) {
                    if (x[i] < params[i].lo || x[i] > params[i].hi) ok = false;
                }
            }
            if (!ok) {
                for (Eigen::Index i = 0; i < d; ++i) x[i] = std::clamp(x[i], params[i].lo, params[i].hi);
            }
            double f;
            try {
                f = objective(std::vector<double>(x.data(), x.data() + d));
                if (std::isnan(f)) f = kNegInf;
            } catch (const std::exception&) {
                f = kNegInf;
            }
            xs.push_back(x);
            fs.push_back(f);
        }
        std::vector<std::size_t> order(xs.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return fs[a] > fs[b]; });
        Eigen::VectorXd emu = Eigen::VectorXd::Zero(d);
        double ef = 0.0;
        for (int e = 0; e < opt.elites; ++e) {
            emu += xs[order[e]];
            ef += fs[order[e]];
        }
        emu /= opt.elites;
        ef /= opt.elites;
        Eigen::MatrixXd ecov = Eigen::MatrixXd::Zero(d, d);
        for (int e = 0; e < opt.elites; ++e) {
            const Eigen::VectorXd dx = xs[order[e]] - emu;
            ecov += dx * dx.transpose();
        }
        ecov /= opt.elites;
        if (!opt.full_covariance) ecov = Eigen::MatrixXd(ecov.diagonal().asDiagonal());

        mu = opt.alpha_mu * emu + (1.0 - opt.alpha_mu) * mu;
        cov = opt.alpha_sigma * ecov + (1.0 - opt.alpha_sigma) * cov;

        CeIteration rec;
        rec.mean.assign(mu.data(), mu.data() + d);
        rec.elite_mean_params.assign(emu.data(), emu.data() + d);
        rec.elite_mean_value = ef;
        if (res.history.empty() || ef > res.best_value) {
            res.best_value = ef;
            res.best = rec.elite_mean_params;
        }
        res.history.push_back(std::move(rec));
    }
    return res;
}

}  // namespace agmcts
