// plan: run, tune and summarize planning experiments.
#include "agmcts/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace agmcts;
using nlohmann::json;

namespace {

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    return json::parse(in);
}

std::set<RowKey> existing_keys(const std::string& path) {
    std::set<RowKey> keys;
    std::ifstream in(path);
    if (!in) return keys;
    for (const auto& r : read_csv(in)) keys.insert({r.domain, r.solver, r.n_sims, r.seed});
    return keys;
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& sets,
            const std::string& solver, const std::string& domain, int sims, int seeds,
            const std::string& out_path, int workers, bool resume) {
    json j = config_path.empty() ? json::object() : load_json(config_path);
    if (!solver.empty()) j["solver"] = solver;
    if (!domain.empty()) j["domain"] = domain;
    if (sims > 0) {
        j["n_sims"] = sims;
        if (!j.contains("budget_multipliers")) j["budget_multipliers"] = {1.0};
    }
    if (seeds > 0) j["seeds"] = seeds;
    if (workers > 0) j["workers"] = workers;
    for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects path=value, got '" + s + "'");
        set_dotted(j, s.substr(0, eq), s.substr(eq + 1));
    }
    ExperimentConfig cfg = j.get<ExperimentConfig>();
    cfg.validate();

    std::set<RowKey> skip;
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!out_path.empty()) {
        bool write_header = true;
        if (resume) {
            skip = existing_keys(out_path);
            std::ifstream probe(out_path);
            write_header = !probe || probe.peek() == std::ifstream::traits_type::eof();
            file.open(out_path, std::ios::app);
        } else {
            file.open(out_path);
        }
        if (!file) throw ConfigError("cannot write " + out_path);
        if (write_header) file << csv_header() << '\n';
        out = &file;
    } else {
        std::cout << csv_header() << '\n';
    }
    const auto rows = run_sweep(cfg, out, skip);
    if (!out_path.empty()) {
        std::cerr << summary_table(summarize(rows));
    }
    return 0;
}

int cmd_tune(const std::string& config_path, const std::string& out_path) {
    // {"experiment": {...}, "params": [{"name","lo","hi","mean","sd"}...],
    //  "samples", "elites", "iterations", "episodes", "alpha_mu", "alpha_sigma",
    //  "full_covariance", "seed"}
    const json j = load_json(config_path);
    ExperimentConfig base = j.value("experiment", json::object()).get<ExperimentConfig>();
    std::vector<CeParam> params;
    for (const auto& p : j.at("params")) {
        params.push_back({p.at("name").get<std::string>(), p.at("lo").get<double>(),
                          p.at("hi").get<double>(), p.at("mean").get<double>(),
                          p.at("sd").get<double>()});
    }
    CeOptions opt;
    opt.samples = j.value("samples", opt.samples);
    opt.elites = j.value("elites", opt.elites);
    opt.iterations = j.value("iterations", opt.iterations);
    opt.alpha_mu = j.value("alpha_mu", opt.alpha_mu);
    opt.alpha_sigma = j.value("alpha_sigma", opt.alpha_sigma);
    opt.full_covariance = j.value("full_covariance", opt.full_covariance);
    opt.seed = j.value("seed", std::uint64_t{0});
    const int episodes = j.value("episodes", 40);
    std::cerr << "ce: " << opt.samples << " samples, " << opt.elites << " elites, " << episodes
              << " episodes per sample\n";

    std::uint64_t call = 0;
    auto objective = [&](const std::vector<double>& x) {
        ExperimentConfig cfg = base;
        for (std::size_t i = 0; i < params.size(); ++i) {
            const std::string& name = params[i].name;
            const bool integral = name == "k_opt" || name == "k_rollout" || name == "particles" ||
                                  name == "k_obs" || name == "k_belief" || name == "k_reward" ||
                                  name == "k_child_min" || name == "k_child_visits";
            if (integral) {
                cfg.solver_config[name] = static_cast<int>(std::lround(x[i]));
            } else {
                cfg.solver_config[name] = x[i];
            }
        }
        cfg.seeds = episodes;
        cfg.budget_multipliers = {1.0};
        cfg.seed_base = base.seed_base + 0x1000 * (++call);
        const auto s = summarize(run_sweep(cfg, nullptr));
        if (s.empty()) return kNegInf;
        return s.front().mean;
    };
    const CeResult res = ce_optimize(params, objective, opt);
    json out;
    for (std::size_t i = 0; i < params.size(); ++i) out["params"][params[i].name] = res.best[i];
    out["best_elite_mean"] = res.best_value;
    for (const auto& h : res.history) {
        out["history"].push_back({{"mean", h.mean},
                                  {"elite_mean_params", h.elite_mean_params},
                                  {"elite_mean_value", h.elite_mean_value}});
    }
    if (out_path.empty()) {
        std::cout << out.dump(2) << '\n';
    } else {
        std::ofstream(out_path) << out.dump(2) << '\n';
    }
    return 0;
}

int cmd_summarize(const std::string& path, bool as_csv) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    const auto s = summarize(read_csv(in));
    std::cout << (as_csv ? summary_csv(s) : summary_table(s));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Continuous-space online planning experiments"};
    app.require_subcommand(1);

    std::string config, solver, domain, out;
    std::vector<std::string> sets;
    int sims = 0, seeds = 0, workers = 0;
    bool resume = false;
    auto* run = app.add_subcommand("run", "Run a seeded sweep and write result rows as CSV");
    run->add_option("--config", config, "Experiment JSON");
    run->add_option("--solver", solver, "agmcts | dpw");
    run->add_option("--domain", domain, "Registered domain name");
    run->add_option("--sims", sims, "Simulation budget (single budget unless multipliers given)");
    run->add_option("--seeds", seeds, "Number of seeds");
    run->add_option("--out", out, "Output CSV (stdout when omitted)");
    run->add_option("--workers", workers, "Worker threads (default: AGMCTS_WORKERS or cores)");
    run->add_option("--set", sets, "Override a config field: dotted.path=value");
    run->add_flag("--resume", resume, "Skip (solver, budget, seed) rows already in --out");

    std::string tune_config, tune_out;
    auto* tune = app.add_subcommand("tune", "Cross-entropy hyperparameter search");
    tune->add_option("--config", tune_config, "Tuning JSON")->required();
    tune->add_option("--out", tune_out, "Best-parameter JSON");

    std::string csv_path;
    bool as_csv = false;
    auto* summ = app.add_subcommand("summarize", "Mean and standard error per (solver, budget)");
    summ->add_option("results", csv_path, "Result CSV")->required();
    summ->add_flag("--csv", as_csv, "Emit CSV instead of a table");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return cmd_run(config, sets, solver, domain, sims, seeds, out, workers, resume);
        if (*tune) return cmd_tune(tune_config, tune_out);
        if (*summ) return cmd_summarize(csv_path, as_csv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
