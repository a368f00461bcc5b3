#pragma once

#include "agmcts/gradient.hpp"
#include "agmcts/mis_tree.hpp"

#include <string>

namespace agmcts {

enum class UpdateMode { Exact, Linearized };

struct SolverConfig {
    double c = 1.0;
    double k_a = 5.0;
    double alpha_a = 0.5;
    double k_o = 5.0;
    double alpha_o = 0.5;
    int n_sims = 500;
    int max_depth = -1;               // < 0: use the domain horizon
    double discount = 0.0;            // <= 0: use the domain discount
    int particles = 1;                // J
    int k_rollout = 1;
    int k_opt = 0;
    double lr = 0.01;                 // Adam learning rate
    double t_min = 0.0;               // commit distance
    double t_max = kInf;              // max-norm of one committed update
    double t_add = 0.0;               // force a new child when every omega is below this
    double t_del = 0.0;               // delete children with omega below this
    int k_child_min = 1;
    int k_child_visits = 1;
    int k_belief = 0;                 // K_b, <= 0 for the exact per-belief sum
    int k_obs = 1;                    // K_O, sampled children in exact mode
    int k_reward = 0;                 // K_r, fresh draws for the immediate-reward term
    UpdateMode update = UpdateMode::Linearized;
    bool decay = false;
    // Classic DPW estimator: Q as the running mean of sampled returns. Off by
    // default so that DPW and AGMCTS with K_opt = 0 share all bookkeeping.
    bool classic_returns = false;
    // Root action: largest Q estimate, or most visits when set.
    bool select_by_visits = false;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SolverStats {
    std::int64_t sims = 0;
    double wall_seconds = 0.0;
    std::int64_t gradient_steps = 0;
    std::int64_t action_updates = 0;
    std::int64_t force_samples = 0;
    std::int64_t prunes = 0;
    std::int64_t degenerate_children = 0;

    SolverStats& operator+=(const SolverStats& o);
};

enum class SolverKind { Agmcts, Dpw };

SolverKind parse_solver(const std::string& name);
std::string solver_name(SolverKind kind);

// Tuned settings per (domain, solver) for the nine registered domains.
SolverConfig default_solver_config(const std::string& domain, SolverKind solver);
// J^PF of the episode-level particle filter.
int default_inference_particles(const std::string& domain);

// One search from a fixed root belief. Both planners run the same SIMULATE;
// DPW never calls ACTIONOPT and never evaluates transition densities.
class PlanningSession {
public:
    PlanningSession(const ProblemModel& model, SolverConfig config, SolverKind kind);

    // Runs n_sims simulations from `root` with `depth` remaining steps and
    // returns the root action with the largest Q estimate.
    Action plan(const ParticleBelief& root, int depth);

    const MisTree& tree() const { return tree_; }
    MisTree& tree() { return tree_; }
    const SolverStats& stats() const { return stats_; }
    const SolverConfig& config() const { return cfg_; }
    NodeId root() const { return root_; }
    Rng& rng() { return rng_; }

    double simulate(NodeId state, int depth);
    NodeId action_prog_widen(NodeId state);
    bool action_opt(NodeId state, NodeId action);
    double rollout(const ParticleBelief& b, int depth);
    // Generates a new child of `action`; returns r + gamma * v_leaf.
    double expand(NodeId action, int depth);
    double action_value(const MisActionNode& node) const;
    Action best_root_action() const;

private:
    const ProblemModel& model_;
    SolverConfig cfg_;
    SolverKind kind_;
    double gamma_;
    bool pomdp_;
    MisTree tree_;
    Rng rng_;
    SolverStats stats_;
    NodeId root_ = kNoNode;
};

}  // namespace agmcts
