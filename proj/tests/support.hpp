#pragma once

#include "agmcts/belief.hpp"
#include "agmcts/density.hpp"
#include "agmcts/harness.hpp"
#include "agmcts/mis_tree.hpp"

#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

namespace agmcts::testing {

// s' = s + a + sigma * nu, r = -(s')^2, one step. grad_a Q(s, a) = -2 (s + a).
class LinearGaussian final : public ProblemModel {
public:
    explicit LinearGaussian(double sigma = 0.5, int horizon = 1) : sigma_(sigma) {
        info_.name = "linear-gaussian";
        info_.state_dim = 1;
        info_.action_dim = 1;
        info_.obs_dim = 1;
        info_.discount = 1.0;
        info_.horizon = horizon;
        info_.has_observations = false;
        info_.exact_density = true;
        info_.density_gradient = true;
        info_.posterior_only_reward = true;
        action_set_ = ActionSet::box(Vec::Constant(1, -10.0), Vec::Constant(1, 10.0));
    }

    double sigma() const { return sigma_; }

    State sample_initial_state(Rng& rng) const override { return Vec::Constant(1, rng.normal()); }
    bool is_terminal(const State&) const override { return false; }

    TransitionSample sample_transition(const State& s, const Action& a, Rng& rng) const override {
        TransitionSample t;
        t.next = Vec::Constant(1, s[0] + a[0] + sigma_ * rng.normal());
        t.reward = -t.next[0] * t.next[0];
        return t;
    }
    double log_transition_density(const State& s, const Action& a, const State& next,
                                  const TransitionCache&) const override {
        return normal_logpdf(next[0] - s[0] - a[0], sigma_);
    }
    Vec grad_log_transition_density(const State& s, const Action& a, const State& next,
                                    const TransitionCache&) const override {
        return Vec::Constant(1, (next[0] - s[0] - a[0]) / (sigma_ * sigma_));
    }
    RewardGrad reward_and_grad(const State&, const Action& a, const State& next) const override {
        return {-next[0] * next[0], Vec::Zero(a.size())};
    }
    Observation sample_observation(const State& next, Rng& rng) const override {
        return Vec::Constant(1, next[0] + rng.normal());
    }
    double log_observation_density(const State& next, const Observation& o) const override {
        return normal_logpdf(o[0] - next[0], 1.0);
    }
    Action rollout_action(const State& s, Rng&) const override { return Vec::Constant(1, -s[0]); }

private:
    double sigma_;
};

// Root belief b, one action a and `children` sampled posterior nodes with
// proposal = current action (omega = 1). Children are terminal, value 0.
inline MisTree one_step_tree(const ProblemModel& model, const ParticleBelief& b, const Action& a,
                             int children, Rng& rng, NodeId* action_out) {
    MisTree tree(1.0);
    const NodeId root = tree.add_root(b, 1, false);
    const NodeId act = tree.add_action(root, a);
    for (int i = 0; i < children; ++i) {
        PropagatedBelief bm = propagate(b, a, model, rng, true);
        ChildEdge e;
        double lt = 0.0;
        for (double l : bm.log_densities) lt += l;
        e.log_target = lt;
        e.log_proposal = lt;
        e.reward = bm.reward;
        e.proposal = a;
        ParticleBelief post = bm.as_belief();
        e.propagated = std::move(bm);
        const auto idx = tree.add_child(act, std::move(e), std::move(post), 0, true, 0.0);
        tree.action_backprop(act, idx);
    }
    tree.state_backprop(root, 0);
    *action_out = act;
    return tree;
}

// Runs `count` episodes on all available cores; rows are in seed order.
inline std::vector<ResultRow> run_seeds(const ProblemModel& model, SolverKind kind,
                                        const SolverConfig& cfg, int count,
                                        std::uint64_t seed_base, const EpisodeOptions& opt) {
    std::vector<ResultRow> rows(static_cast<std::size_t>(count));
    std::atomic<int> next{0};
    auto work = [&] {
        for (int i = next++; i < count; i = next++) {
            rows[static_cast<std::size_t>(i)] =
                run_episode(model, kind, cfg, episode_seed(seed_base, static_cast<std::uint64_t>(i)), opt);
        }
    };
    const int workers = std::max(1, std::min(default_workers(), count));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    return rows;
}

struct MeanSem {
    double mean = 0.0;
    double sem = 0.0;
    int n = 0;
};

inline MeanSem mean_sem(const std::vector<double>& xs) {
    MeanSem m;
    m.n = static_cast<int>(xs.size());
    if (xs.empty()) return m;
    for (double x : xs) m.mean += x;
    m.mean /= m.n;
    if (m.n < 2) return m;
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.sem = std::sqrt(ss / (m.n - 1)) / std::sqrt(static_cast<double>(m.n));
    return m;
}

}  // namespace agmcts::testing
