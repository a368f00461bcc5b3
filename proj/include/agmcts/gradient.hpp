#pragma once

#include "agmcts/mis_tree.hpp"

namespace agmcts {

enum class GradientMode { Sampled, AllChildren };

struct GradientEstimate {
    Vec g;
    int children_used = 0;
    int skipped = 0;  // children left out because their score hit a clip boundary
};

struct GradientOptions {
    GradientMode mode = GradientMode::AllChildren;
    int k_obs = 1;     // K_O: children drawn in sampled mode
    int k_belief = 0;  // K_b: particles per propagated-belief score, <= 0 for the exact sum
    int k_reward = 0;  // K_r: fresh draws for the immediate-reward term, 0 disables it
    bool cache_scores = true;
};

// grad_a log p_T(b- | b, a) for one child at the node's current action. Sets
// edge.score/has_score when `cache` is true. Returns false for a child whose
// every particle sits on a nondifferentiable point.
bool edge_score(const MisTree& tree, NodeId action, ChildEdge& edge, const ProblemModel& model,
                int k_belief, Rng& rng, bool cache);

// Score-function estimate of grad_a Q_hat(s, a) over the children of `action`:
//   sum_i (w_i / W) [(r_i + gamma V(s'_i)) grad log p_T(s'_i) + grad r_i],
// with w_i = omega_i (n(s'_i)+1). Sampled mode draws K_O children with
// probability w_i / W instead of summing.
GradientEstimate grad_q_mdp(MisTree& tree, NodeId action, const ProblemModel& model,
                            GradientMode mode, int k_obs, Rng& rng, bool cache_scores = true);
GradientEstimate grad_q_pomdp(MisTree& tree, NodeId action, const ProblemModel& model,
                              GradientMode mode, int k_obs, int k_belief, Rng& rng,
                              bool cache_scores = true);
// Immediate reward handled by K_r fresh transitions from the parent belief;
// the children only carry the discounted future value.
GradientEstimate grad_q_state_reward(MisTree& tree, NodeId action, const ProblemModel& model,
                                     GradientMode mode, int k_reward, int k_obs, int k_belief,
                                     Rng& rng, bool cache_scores = true);
GradientEstimate estimate_gradient(MisTree& tree, NodeId action, const ProblemModel& model,
                                   const GradientOptions& opt, Rng& rng);

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

// Ascent step: returns +lr * m_hat / (sqrt(v_hat) + eps).
Vec adam_step(AdamState& st, const Vec& g, double lr);

// max(0.999^T, 0.1), or 1 when decay is off.
double decay_factor(int t, bool decay_enabled);
Vec clip_norm(const Vec& v, double max_norm);

// a_acc' = project(a_acc + lambda * delta).
Action accumulate_step(const Action& a_acc, const Vec& delta, int t, bool decay_enabled,
                       const ActionSet& set);
// project(a + clip_norm(a_acc - a, t_max)).
Action clipped_commit(const Action& a, const Action& a_acc, double t_max, const ActionSet& set);
bool commit_rule(const Action& a_acc, const Action& a, double t_min);

}  // namespace agmcts
