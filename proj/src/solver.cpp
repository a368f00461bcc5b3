#include "agmcts/solver.hpp"

#include <chrono>
#include <cmath>

namespace agmcts {

void SolverConfig::validate() const {
    auto fail = [](const std::string& field, const std::string& msg) {
        throw ConfigError("solver_config." + field + ": " + msg);
    };
    if (!(alpha_a > 0.0 && alpha_a < 1.0)) fail("alpha_a", "must lie in (0, 1)");
    if (!(alpha_o > 0.0 && alpha_o < 1.0)) fail("alpha_o", "must lie in (0, 1)");
    if (k_a <= 0.0) fail("k_a", "must be positive");
    if (k_o < 0.0) fail("k_o", "must be non-negative");
    if (c < 0.0) fail("c", "must be non-negative");
    if (n_sims < 1) fail("n_sims", "must be >= 1");
    if (particles < 1) fail("particles", "must be >= 1");
    if (k_rollout < 1) fail("k_rollout", "must be >= 1");
    if (k_opt < 0) fail("k_opt", "must be >= 0");
    if (t_add < 0.0 || t_add > 1.0) fail("t_add", "must lie in [0, 1]");
    if (t_del < 0.0 || t_del > 1.0) fail("t_del", "must lie in [0, 1]");
    if (t_min < 0.0) fail("t_min", "must be non-negative");
    if (!(t_max > 0.0)) fail("t_max", "must be positive");
    if (k_child_min < 0) fail("k_child_min", "must be >= 0");
    if (k_child_visits < 1) fail("k_child_visits", "must be >= 1");
    if (k_obs < 1) fail("k_obs", "must be >= 1");
    if (k_reward < 0) fail("k_reward", "must be >= 0");
}

SolverStats& SolverStats::operator+=(const SolverStats& o) {
    sims += o.sims;
    wall_seconds += o.wall_seconds;
    gradient_steps += o.gradient_steps;
    action_updates += o.action_updates;
    force_samples += o.force_samples;
    prunes += o.prunes;
    degenerate_children += o.degenerate_children;
    return *this;
}

SolverKind parse_solver(const std::string& name) {
    if (name == "agmcts") return SolverKind::Agmcts;
    if (name == "dpw" || name == "pft-dpw" || name == "pft") return SolverKind::Dpw;
    throw ConfigError("unknown solver '" + name + "'");
}

std::string solver_name(SolverKind kind) { return kind == SolverKind::Agmcts ? "agmcts" : "dpw"; }

namespace {

struct Dpw5 {
    double c, k_a, alpha_a, k_o, alpha_o;
};

SolverConfig with_dpw(SolverConfig cfg, const Dpw5& p) {
    cfg.c = p.c;
    cfg.k_a = p.k_a;
    cfg.alpha_a = p.alpha_a;
    cfg.k_o = p.k_o;
    cfg.alpha_o = p.alpha_o;
    return cfg;
}

}  // namespace

int default_inference_particles(const std::string& domain) {
    if (domain == "lightdark2") return 2048;
    if (domain == "lightdark3") return 4096;
    if (domain == "lightdark4") return 8192;
    if (domain.rfind("mountaincar", 0) == 0 || domain.rfind("hillcar", 0) == 0) return 200;
    if (domain.rfind("lander", 0) == 0) return 2000;
    throw ConfigError("unknown domain '" + domain + "'");
}

SolverConfig default_solver_config(const std::string& domain, SolverKind solver) {
    SolverConfig cfg;
    const bool ag = solver == SolverKind::Agmcts;

    if (domain.rfind("lightdark", 0) == 0) {
        const int dim = domain.back() - '0';
        cfg.particles = dim == 2 ? 256 : dim == 3 ? 512 : 1024;
        cfg.k_rollout = 10;
        cfg.update = UpdateMode::Exact;
        if (!ag) {
            if (dim == 2) return with_dpw(cfg, {1.689, 7.332, 0.473, 10.49, 0.0885});
            if (dim == 3) return with_dpw(cfg, {2.429, 7.309, 0.326, 11.27, 0.195});
            return with_dpw(cfg, {1.111, 9.309, 0.343, 10.48, 0.109});
        }
        cfg.t_add = 0.9;
        cfg.t_del = 1e-8;
        cfg.k_opt = 10;
        cfg.t_max = kInf;
        cfg.k_child_min = 1;
        cfg.k_child_visits = 1;
        cfg.k_belief = 5;
        cfg.k_obs = 10;
        cfg.k_reward = 0;
        cfg.decay = true;
        if (dim == 2) {
            cfg = with_dpw(cfg, {4.026, 8.346, 0.515, 12.03, 0.444});
            cfg.lr = 0.00292;
            cfg.t_min = 0.00193;
        } else if (dim == 3) {
            cfg = with_dpw(cfg, {5.212, 8.075, 0.471, 15.20, 0.317});
            cfg.lr = 0.00169;
            cfg.t_min = 0.00348;
        } else {
            cfg = with_dpw(cfg, {2.625, 8.043, 0.495, 17.21, 0.460});
            cfg.lr = 0.00138;
            cfg.t_min = 0.0036;
        }
        return cfg;
    }

    const bool car = domain.rfind("mountaincar", 0) == 0 || domain.rfind("hillcar", 0) == 0;
    const bool lander = domain.rfind("lander", 0) == 0;
    if (!car && !lander) throw ConfigError("unknown domain '" + domain + "'");
    const bool pomdp = domain.size() > 5 && domain.substr(domain.size() - 5) == "pomdp";

    if (car) {
        const bool mc = domain.rfind("mountaincar", 0) == 0;
        cfg.particles = pomdp ? 30 : 1;
        cfg.k_rollout = pomdp ? 5 : 1;
        cfg.n_sims = 500;
        if (!ag) {
            if (mc) {
                return pomdp ? with_dpw(cfg, {146.08, 5.625, 0.824, 1.049, 0.415})
                             : with_dpw(cfg, {92.148, 6.672, 0.581, 0.277, 0.454});
            }
            return pomdp ? with_dpw(cfg, {119.28, 7.386, 0.528, 1.256, 0.588})
                         : with_dpw(cfg, {132.24, 6.552, 0.532, 5.375, 0.203});
        }
        cfg.t_min = 0.0;
        cfg.k_opt = 3;
        cfg.t_max = 0.1;
        cfg.k_child_min = 2;
        cfg.k_child_visits = 1;
        cfg.k_belief = 3;
        cfg.update = UpdateMode::Linearized;
        cfg.decay = false;
        cfg.t_add = pomdp ? 0.99 : 1.0;
        cfg.t_del = pomdp ? 1e-8 : 0.5;
        if (mc) {
            if (pomdp) {
                cfg = with_dpw(cfg, {0.001, 4.558, 0.698, 0.379, 0.382});
                cfg.lr = 0.0226;
            } else {
                cfg = with_dpw(cfg, {0.0, 6.876, 0.619, 0.292, 0.385});
                cfg.lr = 0.0295;
            }
        } else {
            if (pomdp) {
                cfg = with_dpw(cfg, {132.83, 8.657, 0.490, 6.050, 0.130});
                cfg.lr = 4.981e-6;
            } else {
                cfg = with_dpw(cfg, {132.24, 6.552, 0.532, 5.375, 0.203});
                cfg.lr = 6.48e-5;
            }
        }
        return cfg;
    }

    cfg.particles = pomdp ? 150 : 1;
    cfg.k_rollout = pomdp ? 5 : 1;
    cfg.n_sims = 1000;
    if (!ag) {
        return pomdp ? with_dpw(cfg, {60.22, 2.687, 0.436, 0.274, 0.575})
                     : with_dpw(cfg, {60.49, 1.421, 0.595, 0.082, 0.726});
    }
    cfg.t_min = 0.0;
    cfg.t_max = 0.1;
    cfg.k_belief = 3;
    cfg.update = UpdateMode::Linearized;
    cfg.decay = false;
    if (pomdp) {
        cfg = with_dpw(cfg, {112.14, 4.846, 0.320, 1.347, 0.273});
        cfg.lr = 0.452;
        cfg.k_opt = 5;
        cfg.t_add = 0.99;
        cfg.t_del = 1e-8;
        cfg.k_child_min = 2;
        cfg.k_child_visits = 2;
    } else {
        cfg = with_dpw(cfg, {61.55, 3.052, 0.377, 0.114, 0.047});
        cfg.lr = 1.316e-5;
        cfg.k_opt = 1;
        cfg.t_add = 0.9;
        cfg.t_del = 0.5;
        cfg.k_child_min = 1;
        cfg.k_child_visits = 1;
    }
    return cfg;
}

PlanningSession::PlanningSession(const ProblemModel& model, SolverConfig config, SolverKind kind)
    : model_(model),
      cfg_(std::move(config)),
      kind_(kind),
      gamma_(cfg_.discount > 0.0 ? cfg_.discount : model.info().discount),
      pomdp_(model.info().has_observations),
      tree_(gamma_),
      rng_(cfg_.seed) {
    cfg_.validate();
}

Action PlanningSession::plan(const ParticleBelief& root, int depth) {
    const auto t0 = std::chrono::steady_clock::now();
    tree_ = MisTree(gamma_);
    stats_ = {};
    root_ = tree_.add_root(root, depth, root.all_terminal(model_));
    for (int i = 0; i < cfg_.n_sims; ++i) {
        simulate(root_, depth);
        ++stats_.sims;
    }
    stats_.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return best_root_action();
}

double PlanningSession::action_value(const MisActionNode& node) const {
    return cfg_.classic_returns ? node.mean_return : tree_.q_value(node);
}

Action PlanningSession::best_root_action() const {
    const auto& r = tree_.states[root_];
    double best = kNegInf;
    NodeId arg = kNoNode;
    for (NodeId a : r.actions) {
        const auto& node = tree_.actions[a];
        if (node.visits <= 0) continue;
        const double q = cfg_.select_by_visits ? static_cast<double>(node.visits) : action_value(node);
        if (arg == kNoNode || q > best) {
            best = q;
            arg = a;
        }
    }
    if (arg == kNoNode) {
        if (r.actions.empty()) return model_.action_set().project(Vec::Zero(model_.info().action_dim));
        arg = r.actions.front();
    }
    return tree_.actions[arg].action;
}

NodeId PlanningSession::action_prog_widen(NodeId state) {
    const auto& s = tree_.states[state];
    const double n = static_cast<double>(s.visits);
    if (static_cast<double>(s.actions.size()) <= cfg_.k_a * std::pow(n, cfg_.alpha_a)) {
        return tree_.add_action(state, model_.action_set().sample_uniform(rng_));
    }
    const double log_n = std::log(n);
    double best = kNegInf;
    NodeId arg = kNoNode;
    for (NodeId a : s.actions) {
        const auto& node = tree_.actions[a];
        double score;
        if (node.visits <= 0) {
            score = kInf;
        } else {
            score = action_value(node) +
                    cfg_.c * std::sqrt(log_n / static_cast<double>(node.visits));
        }
        if (arg == kNoNode || score > best) {
            best = score;
            arg = a;
        }
    }
    return arg;
}

double PlanningSession::rollout(const ParticleBelief& b, int depth) {
    if (depth <= 0) return 0.0;
    const int k = b.size() == 1 ? 1 : cfg_.k_rollout;
    // Particles drawn proportionally to their weights.
    std::vector<State> xs;
    xs.reserve(static_cast<std::size_t>(k));
    if (b.size() == 1) {
        xs.push_back(b.particles[0]);
    } else {
        const double total = b.total_weight();
        for (int i = 0; i < k; ++i) {
            double u = rng_.uniform() * total;
            std::size_t j = 0;
            while (j + 1 < b.size() && u >= b.weights[j]) u -= b.weights[j++];
            xs.push_back(b.particles[j]);
        }
    }
    std::vector<double> ret(xs.size(), 0.0);
    std::vector<unsigned char> done(xs.size(), 0);
    double disc = 1.0;
    for (int t = 0; t < depth; ++t) {
        State mean;
        int active = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (!done[i] && model_.is_terminal(xs[i])) done[i] = 1;
            if (done[i]) continue;
            if (active == 0) {
                mean = xs[i];
            } else {
                mean += xs[i];
            }
            ++active;
        }
        if (active == 0) break;
        if (active > 1) mean /= static_cast<double>(active);
        const Action a = model_.rollout_action(mean, rng_);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (done[i]) continue;
            auto tr = model_.sample_transition(xs[i], a, rng_);
            ret[i] += disc * tr.reward;
            xs[i] = tr.next;
        }
        disc *= gamma_;
    }
    double sum = 0.0;
    for (double r : ret) sum += r;
    return sum / static_cast<double>(ret.size());
}

double PlanningSession::expand(NodeId action, int depth) {
    const bool ag = kind_ == SolverKind::Agmcts;
    const NodeId parent = tree_.actions[action].parent;
    const Action a = tree_.actions[action].action;
    PropagatedBelief bm = propagate(tree_.states[parent].belief, a, model_, rng_, ag);

    ParticleBelief next;
    if (pomdp_) {
        const double total = bm.as_belief().total_weight();
        double u = rng_.uniform() * total;
        std::size_t j = 0;
        while (j + 1 < bm.size() && u >= bm.weights[j]) u -= bm.weights[j++];
        const Observation o = model_.sample_observation(bm.particles[j], rng_);
        next = reweight_and_resample(bm, o, model_, rng_);
    } else {
        next = bm.as_belief();
    }
    const bool terminal = next.all_terminal(model_);
    const double v_leaf = terminal ? 0.0 : rollout(next, depth - 1);

    ChildEdge edge;
    edge.reward = bm.reward;
    edge.proposal = a;
    if (ag) {
        double lp = 0.0;
        for (std::size_t j = 0; j < bm.size(); ++j) {
            if (!bm.absorbed[j]) lp += bm.log_densities[j];
        }
        if (!std::isfinite(lp)) {
            edge.degenerate = true;
            ++stats_.degenerate_children;
            lp = 0.0;
        }
        edge.log_target = lp;
        edge.log_proposal = lp;
    }
    const double reward = bm.reward;
    edge.propagated = std::move(bm);
    tree_.add_child(action, std::move(edge), std::move(next), depth - 1, terminal, v_leaf);
    return reward + gamma_ * v_leaf;
}

bool PlanningSession::action_opt(NodeId state, NodeId action) {
    if (kind_ != SolverKind::Agmcts || cfg_.k_opt <= 0) return false;
    {
        const auto& node = tree_.actions[action];
        if (static_cast<int>(node.children.size()) < cfg_.k_child_min) return false;
        if (node.visits % cfg_.k_child_visits != 0) return false;
    }
    const std::size_t idx = tree_.action_index(state, action);
    const auto& set = model_.action_set();
    const auto& parent_belief = tree_.states[state].belief;

    GradientOptions opt;
    opt.mode = cfg_.update == UpdateMode::Exact ? GradientMode::Sampled : GradientMode::AllChildren;
    opt.k_obs = cfg_.k_obs;
    opt.k_belief = cfg_.k_belief;
    opt.k_reward = cfg_.k_reward;
    opt.cache_scores = cfg_.update == UpdateMode::Linearized;

    auto exact_target = [&](ChildEdge& e, const Action& a_new) {
        if (e.degenerate) {
            e.log_target = kNegInf;
            return;
        }
        e.log_target = propagated_log_likelihood(parent_belief, a_new, e.propagated, model_);
        if (!model_.info().posterior_only_reward) {
            e.reward = belief_reward(parent_belief, a_new, e.propagated, model_, false).reward;
        }
    };
    auto linear_reward = [&](ChildEdge& e, const Action& a_new) {
        if (e.degenerate) {
            e.log_target = kNegInf;
            return;
        }
        if (!model_.info().posterior_only_reward) {
            e.reward = belief_reward(parent_belief, a_new, e.propagated, model_, false).reward;
        }
    };

    bool force = false;
    for (int k = 0; k < cfg_.k_opt; ++k) {
        auto& node = tree_.actions[action];
        if (node.children.empty()) break;
        if (node.accumulated.size() == 0) node.accumulated = node.action;
        GradientEstimate g;
        try {
            g = estimate_gradient(tree_, action, model_, opt, rng_);
        } catch (const TreeError&) {
            break;
        }
        ++stats_.gradient_steps;
        ++node.grad_iters;
        const Vec delta = adam_step(node.adam, g.g, cfg_.lr);
        node.accumulated = accumulate_step(node.accumulated, delta, node.grad_iters, cfg_.decay, set);
        if (!commit_rule(node.accumulated, node.action, cfg_.t_min)) continue;
        const Action a_new = clipped_commit(node.action, node.accumulated, cfg_.t_max, set);
        if (cfg_.update == UpdateMode::Exact) {
            tree_.action_update(action, a_new, exact_target);
        } else {
            tree_.action_update_linearized(action, a_new - node.action, linear_reward);
        }
        ++stats_.action_updates;
        const auto pr = tree_.prune_and_flag_children(action, cfg_.t_del, cfg_.t_add);
        stats_.prunes += static_cast<std::int64_t>(pr.deleted.size());
        force = force || pr.force_sample;
        tree_.state_backprop(state, idx);
        tree_.actions[action].accumulated = a_new;
    }
    if (force) ++stats_.force_samples;
    return force;
}

double PlanningSession::simulate(NodeId state, int depth) {
    if (depth <= 0 || tree_.states[state].terminal) {
        const double v =
            tree_.states[state].terminal ? 0.0 : rollout(tree_.states[state].belief, depth);
        tree_.terminal_state_backprop(state, v);
        return v;
    }
    const NodeId action = action_prog_widen(state);
    const bool add_sample = action_opt(state, action);

    double ret;
    std::size_t edge;
    {
        const auto& node = tree_.actions[action];
        const double limit = cfg_.k_o * std::pow(static_cast<double>(node.visits), cfg_.alpha_o);
        if (add_sample || node.children.empty() ||
            static_cast<double>(node.children.size()) <= limit) {
            ret = expand(action, depth);
            edge = tree_.actions[action].children.size() - 1;
        } else {
            edge = rng_.index(node.children.size());
            const NodeId child = node.children[edge].state;
            const double r = node.children[edge].reward;
            ret = r + gamma_ * simulate(child, depth - 1);
        }
    }
    tree_.action_backprop(action, edge);
    auto& node = tree_.actions[action];
    if (cfg_.classic_returns && node.visits > 0) {
        node.mean_return += (ret - node.mean_return) / static_cast<double>(node.visits);
    }
    tree_.state_backprop(state, tree_.action_index(state, action));
    return ret;
}

}  // namespace agmcts
