#include "agmcts/gradient.hpp"

#include <cmath>

namespace agmcts {

namespace {

struct ChildWeights {
    std::vector<double> p;  // normalized omega * n_{+1}
};

ChildWeights child_weights(const MisTree& tree, const MisActionNode& node) {
    std::vector<double> logs;
    logs.reserve(node.children.size());
    for (const auto& e : node.children) {
        const double n = static_cast<double>(tree.states[e.state].visits + 1);
        logs.push_back(e.log_weight() + std::log(n));
    }
    const double l = log_sum_exp(logs);
    if (!std::isfinite(l)) throw TreeError("all importance weights are zero");
    ChildWeights w;
    w.p.reserve(logs.size());
    for (double x : logs) w.p.push_back(std::exp(x - l));
    return w;
}

std::size_t draw_index(const std::vector<double>& p, Rng& rng) {
    double u = rng.uniform();
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (u < p[i]) return i;
        u -= p[i];
    }
    // Rounding left u just above the total: take the last positive entry.
    for (std::size_t i = p.size(); i-- > 0;) {
        if (p[i] > 0.0) return i;
    }
    return 0;
}

Vec reward_grad(const MisTree& tree, NodeId action, const ChildEdge& edge,
                const ProblemModel& model) {
    const auto& node = tree.actions[action];
    if (model.info().posterior_only_reward) return Vec::Zero(node.action.size());
    const auto& b = tree.states[node.parent].belief;
    return belief_reward(b, node.action, edge.propagated, model, true).grad;
}

// Sum (or sampled mean) of the per-child terms. `with_reward` selects whether
// the child reward enters the score product.
GradientEstimate children_term(MisTree& tree, NodeId action, const ProblemModel& model,
                               GradientMode mode, int k_obs, int k_belief, bool with_reward,
                               Rng& rng, bool cache_scores) {
    auto& node = tree.actions[action];
    if (node.children.empty()) throw TreeError("empty-node");
    const double gamma = tree.discount();
    const auto w = child_weights(tree, node);
    const Eigen::Index da = node.action.size();
    GradientEstimate out{Vec::Zero(da), 0, 0};

    auto term = [&](std::size_t i, Vec& acc) -> bool {
        auto& e = node.children[i];
        if (!edge_score(tree, action, e, model, k_belief, rng, cache_scores)) return false;
        const double v = tree.states[e.state].value;
        const double scale = (with_reward ? e.reward : 0.0) + gamma * v;
        acc += scale * e.score;
        if (with_reward) acc += reward_grad(tree, action, e, model);
        return true;
    };

    if (mode == GradientMode::AllChildren) {
        double used_mass = 0.0;
        for (std::size_t i = 0; i < node.children.size(); ++i) {
            if (w.p[i] == 0.0) continue;
            Vec t = Vec::Zero(da);
            if (term(i, t)) {
                out.g += w.p[i] * t;
                used_mass += w.p[i];
                ++out.children_used;
            } else {
                ++out.skipped;
            }
        }
        if (out.skipped > 0 && used_mass > 0.0) out.g /= used_mass;
        return out;
    }

    if (k_obs < 1) throw ConfigError("sampled gradient mode needs K_O >= 1");
    for (int k = 0; k < k_obs; ++k) {
        const std::size_t i = draw_index(w.p, rng);
        Vec t = Vec::Zero(da);
        if (term(i, t)) {
            out.g += t;
            ++out.children_used;
        } else {
            ++out.skipped;
        }
    }
    if (out.children_used > 0) out.g /= static_cast<double>(out.children_used);
    return out;
}

}  // namespace

bool edge_score(const MisTree& tree, NodeId action, ChildEdge& edge, const ProblemModel& model,
                int k_belief, Rng& rng, bool cache) {
    const auto& node = tree.actions[action];
    const auto& b = tree.states[node.parent].belief;
    if (edge.propagated.size() == 0) throw TreeError("missing-propagated-belief");
    if (edge.degenerate) {
        edge.score = Vec::Zero(node.action.size());
        edge.has_score = true;
        return false;
    }
    const auto lg = propagated_log_likelihood_grad(b, node.action, edge.propagated, k_belief, model,
                                                   rng);
    if (lg.used == 0 && lg.skipped > 0) {
        if (cache) {
            edge.score = Vec::Zero(node.action.size());
            edge.has_score = true;
        }
        return false;
    }
    edge.score = lg.grad;
    if (cache) edge.has_score = true;
    return true;
}

GradientEstimate grad_q_mdp(MisTree& tree, NodeId action, const ProblemModel& model,
                            GradientMode mode, int k_obs, Rng& rng, bool cache_scores) {
    return children_term(tree, action, model, mode, k_obs, 0, true, rng, cache_scores);
}

GradientEstimate grad_q_pomdp(MisTree& tree, NodeId action, const ProblemModel& model,
                              GradientMode mode, int k_obs, int k_belief, Rng& rng,
                              bool cache_scores) {
    return children_term(tree, action, model, mode, k_obs, k_belief, true, rng, cache_scores);
}

GradientEstimate grad_q_state_reward(MisTree& tree, NodeId action, const ProblemModel& model,
                                     GradientMode mode, int k_reward, int k_obs, int k_belief,
                                     Rng& rng, bool cache_scores) {
    if (k_reward <= 0) {
        return children_term(tree, action, model, mode, k_obs, k_belief, true, rng, cache_scores);
    }
    auto out = children_term(tree, action, model, mode, k_obs, k_belief, false, rng, cache_scores);
    const auto& node = tree.actions[action];
    const auto& b = tree.states[node.parent].belief;
    const double total = b.total_weight();
    Vec imm = Vec::Zero(node.action.size());
    int used = 0;
    for (int k = 0; k < k_reward; ++k) {
        // Particle drawn proportionally to its weight.
        double u = rng.uniform() * total;
        std::size_t j = 0;
        while (j + 1 < b.size() && u >= b.weights[j]) u -= b.weights[j++];
        const State& s = b.particles[j];
        ++used;
        if (model.is_terminal(s)) continue;
        const auto t = model.sample_transition(s, node.action, rng);
        try {
            const Vec score = model.grad_log_transition_density(s, node.action, t.next, t.cache);
            imm += t.reward * score;
        } catch (const NondifferentiablePoint&) {
            --used;
            continue;
        }
        if (!model.info().posterior_only_reward) {
            imm += model.reward_and_grad(s, node.action, t.next).grad;
        }
    }
    if (used > 0) out.g += imm / static_cast<double>(used);
    return out;
}

GradientEstimate estimate_gradient(MisTree& tree, NodeId action, const ProblemModel& model,
                                   const GradientOptions& opt, Rng& rng) {
    return grad_q_state_reward(tree, action, model, opt.mode, opt.k_reward, opt.k_obs,
                               opt.k_belief, rng, opt.cache_scores);
}

Vec adam_step(AdamState& st, const Vec& g, double lr) {
    if (st.m.size() != g.size()) {
        st.m = Vec::Zero(g.size());
        st.v = Vec::Zero(g.size());
        st.t = 0;
    }
    ++st.t;
    st.m = kAdamBeta1 * st.m + (1.0 - kAdamBeta1) * g;
    st.v = kAdamBeta2 * st.v + (1.0 - kAdamBeta2) * g.cwiseProduct(g);
    const double c1 = 1.0 - std::pow(kAdamBeta1, st.t);
    const double c2 = 1.0 - std::pow(kAdamBeta2, st.t);
    Vec d(g.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        d[i] = lr * (st.m[i] / c1) / (std::sqrt(st.v[i] / c2) + kAdamEps);
    }
    return d;
}

double decay_factor(int t, bool decay_enabled) {
    if (!decay_enabled) return 1.0;
    return std::max(std::pow(0.999, t), 0.1);
}

Vec clip_norm(const Vec& v, double max_norm) {
    const double n = v.norm();
    if (n > max_norm && n > 0.0) return v * (max_norm / n);
    return v;
}

Action accumulate_step(const Action& a_acc, const Vec& delta, int t, bool decay_enabled,
                       const ActionSet& set) {
    return set.project(a_acc + decay_factor(t, decay_enabled) * delta);
}

Action clipped_commit(const Action& a, const Action& a_acc, double t_max, const ActionSet& set) {
    return set.project(a + clip_norm(a_acc - a, t_max));
}

bool commit_rule(const Action& a_acc, const Action& a, double t_min) {
    return (a_acc - a).norm() > t_min;
}

}  // namespace agmcts
