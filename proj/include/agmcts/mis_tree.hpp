#pragma once

#include "agmcts/belief.hpp"
#include "agmcts/lse.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace agmcts {

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

struct AdamState {
    Vec m;
    Vec v;
    int t = 0;
};

// Child record of an action node. The folded_* fields hold the child's
// statistics as they were last folded into the parent's estimates; the next
// backprop moves the parent from those to the child's current values.
struct ChildEdge {
    NodeId state = kNoNode;
    double log_target = 0.0;    // log p_T(s' | s, a) at the node's current action
    double log_proposal = 0.0;  // log p_T(s' | s, a_prop)
    double reward = 0.0;        // r(s, a, s') at the current action
    Vec reward_grad;            // grad_a r at the current action (empty when zero)
    Vec score;                  // cached grad_a log p_T at the current action
    bool has_score = false;
    bool degenerate = false;  // proposal density was not finite at the sampled point
    std::int64_t folded_count = 0;  // n(s')+1, 0 before the first fold
    double folded_value = 0.0;
    Action proposal;
    PropagatedBelief propagated;

    double log_weight() const { return log_target - log_proposal; }
};

struct MisStateNode {
    NodeId parent = kNoNode;  // owning action node
    std::int64_t visits = 0;  // n(s)
    double value = 0.0;       // V_hat(s)
    int depth = 0;            // remaining planning depth
    bool terminal = false;
    bool alive = true;
    std::vector<NodeId> actions;
    std::vector<std::int64_t> folded_visits;  // n(s,a) as last folded
    std::vector<double> folded_q;             // Q_hat(s,a) as last folded
    ParticleBelief belief;

    bool is_leaf() const { return actions.empty(); }
};

struct MisActionNode {
    NodeId parent = kNoNode;
    Action action;
    std::int64_t visits = 0;  // n(s,a)
    double log_eta = kNegInf;
    double reward_est = 0.0;    // r_hat
    double future_value = 0.0;  // V_hat_f
    std::vector<ChildEdge> children;
    Action accumulated;  // optimizer iterate a_acc (empty until first use)
    AdamState adam;
    int grad_iters = 0;
    double mean_return = 0.0;  // running mean of sampled returns (classic estimator)
};

struct SnmisValues {
    double log_eta;
    double reward_est;
    double future_value;
};

struct WeightsSummary {
    std::vector<double> log_weights;
    double max_log_weight = kNegInf;
};

struct PruneResult {
    std::vector<NodeId> deleted;
    bool force_sample = false;
};

class MisTree {
public:
    // Relative drop of eta below which a deletion falls back to a full
    // recompute of the node (the incremental form loses digits there).
    static constexpr double kRecomputeRatio = 1e-6;

    explicit MisTree(double discount = 1.0) : discount_(discount) {}

    double discount() const { return discount_; }

    NodeId add_root(ParticleBelief belief, int depth, bool terminal);
    NodeId add_action(NodeId state, const Action& a);
    // Attaches a new child state holding `leaf_value` with n(s') = 0. The edge
    // is not folded yet; call action_backprop for that.
    std::size_t add_child(NodeId action, ChildEdge edge, ParticleBelief belief, int depth,
                          bool terminal, double leaf_value);

    double q_value(NodeId action) const;
    double q_value(const MisActionNode& node) const;

    // Folds the child's current (n+1, V_hat) into the parent's estimates.
    void action_backprop(NodeId action, std::size_t edge);
    // Folds the action child's current (n, Q_hat) into the state value.
    void state_backprop(NodeId state, std::size_t action_index);
    // Running mean of rollout values for leaf nodes.
    void terminal_state_backprop(NodeId state, double v, std::int64_t count = 1);
    // Removes an edge, unwinding its contribution with n' = 0.
    void remove_child(NodeId action, std::size_t edge);

    using TargetFn = std::function<void(ChildEdge&, const Action&)>;
    using RewardFn = std::function<void(ChildEdge&, const Action&)>;

    // `target` recomputes log_target (and reward) of an edge at a'.
    WeightsSummary action_update(NodeId action, const Action& a_new, const TargetFn& target);
    // First-order update: log weights shifted by the cached scores; `reward`
    // may be empty.
    WeightsSummary action_update_linearized(NodeId action, const Vec& delta,
                                            const RewardFn& reward);
    PruneResult prune_and_flag_children(NodeId action, double t_del, double t_add);

    // Full O(|C|) evaluation from the children's current values.
    SnmisValues snmis_recompute(NodeId action) const;
    // Rebuilds eta, r_hat, V_hat_f and n(s,a) from the folded records.
    void rebuild_estimates(NodeId action);

    // Folds pending changes of `state` into every ancestor.
    void propagate_to_root(NodeId state);

    std::size_t edge_index(NodeId action, NodeId child) const;
    std::size_t action_index(NodeId state, NodeId action) const;

    std::vector<MisStateNode> states;
    std::vector<MisActionNode> actions;

    std::string dump() const;

    // Visit-count identities, fold records and eta support over live nodes. Only
    // meaningful once every pending change has been propagated.
    std::vector<std::string> check_invariants() const;

private:
    void fold(MisActionNode& node, double log_weight, std::int64_t n_old, double v_old,
              std::int64_t n_new, double v_new, double reward_old, double reward_new);
    void kill_subtree(NodeId state);

    double discount_;
};

}  // namespace agmcts
