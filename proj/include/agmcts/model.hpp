#pragma once

#include "agmcts/rng.hpp"
#include "agmcts/types.hpp"

#include <memory>
#include <string>

namespace agmcts {

enum class ActionSetKind { Box, Ball };

struct ActionSet {
    ActionSetKind kind = ActionSetKind::Box;
    Vec lower;
    Vec upper;
    double radius = 0.0;

    static ActionSet box(const Vec& lower, const Vec& upper);
    static ActionSet ball(int dim, double radius);

    int dim() const;
    bool contains(const Action& a, double tol = 1e-12) const;
    Action project(const Action& a) const;
    // Uniform over the set; the ball is sampled by rejection from its bounding box.
    Action sample_uniform(Rng& rng) const;
};

enum class ReferenceMeasure { Lebesgue, Hausdorff, MixtureWithAtoms };

struct ModelInfo {
    std::string name;
    int state_dim = 0;
    int action_dim = 0;
    int obs_dim = 0;
    double discount = 1.0;
    int horizon = 0;
    bool has_observations = false;
    bool exact_density = false;
    bool density_gradient = false;
    // r(s, a, s') depends only on s', so its action gradient is zero.
    bool posterior_only_reward = false;
    ReferenceMeasure measure = ReferenceMeasure::Lebesgue;
};

struct TransitionSample {
    State next;
    double reward = 0.0;
    TransitionCache cache;
};

struct RewardGrad {
    double reward = 0.0;
    Vec grad;
};

// Generative model plus exact densities. Instances are immutable and may be
// shared across threads; randomness always comes from the caller's Rng.
class ProblemModel {
public:
    virtual ~ProblemModel() = default;

    const ModelInfo& info() const { return info_; }
    const ActionSet& action_set() const { return action_set_; }

    virtual State sample_initial_state(Rng& rng) const = 0;
    virtual bool is_terminal(const State& s) const = 0;

    virtual TransitionSample sample_transition(const State& s, const Action& a, Rng& rng) const = 0;

    // log p_T(s' | s, a) with respect to the domain's reference measure; the
    // cache is the one produced when s' was sampled (needed by domains whose
    // inverse dynamics are only known through the recorded perturbed input).
    virtual double log_transition_density(const State& s, const Action& a, const State& next,
                                          const TransitionCache& cache) const;
    virtual Vec grad_log_transition_density(const State& s, const Action& a, const State& next,
                                            const TransitionCache& cache) const;

    virtual RewardGrad reward_and_grad(const State& s, const Action& a, const State& next) const = 0;

    virtual Observation sample_observation(const State& next, Rng& rng) const;
    virtual double log_observation_density(const State& next, const Observation& o) const;

    virtual Action rollout_action(const State& s, Rng& rng) const = 0;

protected:
    ModelInfo info_;
    ActionSet action_set_;
};

using ModelPtr = std::shared_ptr<const ProblemModel>;

}  // namespace agmcts
