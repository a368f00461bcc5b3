#pragma once

#include "agmcts/model.hpp"

#include <cstddef>
#include <vector>

namespace agmcts {

// Ordered weighted particle set. Order matters: a propagated belief is
// aligned index-by-index with its parent.
struct ParticleBelief {
    std::vector<State> particles;
    std::vector<double> weights;

    static ParticleBelief point(const State& s);
    static ParticleBelief uniform(std::vector<State> particles);

    std::size_t size() const { return particles.size(); }
    double total_weight() const;
    State mean() const;
    bool all_terminal(const ProblemModel& model) const;
};

// b- : the parent's particles pushed through p_T(. | s, a), weights unchanged.
// Particles whose parent state was terminal are absorbed (copied, log density 0).
struct PropagatedBelief {
    std::vector<State> particles;
    std::vector<double> weights;
    std::vector<TransitionCache> caches;
    std::vector<double> log_densities;
    std::vector<unsigned char> absorbed;
    Action action;
    double reward = 0.0;  // weighted mean of r(s^j, a, s-^j)

    std::size_t size() const { return particles.size(); }
    ParticleBelief as_belief() const { return {particles, weights}; }
};

PropagatedBelief propagate(const ParticleBelief& b, const Action& a, const ProblemModel& model,
                           Rng& rng, bool cache_densities = true);

double effective_sample_size(const std::vector<double>& weights);

// Indices of a systematic resample of `count` draws from normalized weights.
std::vector<std::size_t> systematic_indices(const std::vector<double>& weights, std::size_t count,
                                            Rng& rng);

// Weights multiplied by p_O(o | s-), normalized in log space.
ParticleBelief reweight(const ParticleBelief& b, const Observation& o, const ProblemModel& model);

// Bootstrap-filter update used inside planning: reweight then systematically
// resample J particles with uniform weights.
ParticleBelief reweight_and_resample(const PropagatedBelief& bm, const Observation& o,
                                     const ProblemModel& model, Rng& rng);

ParticleBelief systematic_resample(const ParticleBelief& b, Rng& rng);

// J particles drawn uniformly without replacement, keeping their weights.
ParticleBelief subsample(const ParticleBelief& b, std::size_t count, Rng& rng);

// sum_j log p_T(s-^j | s^j, a). Cached values are reused when a is the
// generating action.
double propagated_log_likelihood(const ParticleBelief& b, const Action& a,
                                 const PropagatedBelief& bm, const ProblemModel& model);

struct LikelihoodGrad {
    Vec grad;
    int used = 0;
    int skipped = 0;  // nondifferentiable particles left out of the estimate
};

// (J/K) sum_l grad log p_T(s-^{j_l} | s^{j_l}, a), indices uniform with
// replacement. K >= J (or K <= 0) gives the exact sum with each index once.
LikelihoodGrad propagated_log_likelihood_grad(const ParticleBelief& b, const Action& a,
                                              const PropagatedBelief& bm, int k,
                                              const ProblemModel& model, Rng& rng);

RewardGrad belief_reward(const ParticleBelief& b, const Action& a, const PropagatedBelief& bm,
                         const ProblemModel& model, bool want_grad);

}  // namespace agmcts
