#include "agmcts/belief.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace agmcts {

ParticleBelief ParticleBelief::point(const State& s) { return {{s}, {1.0}}; }

ParticleBelief ParticleBelief::uniform(std::vector<State> particles) {
    const double w = 1.0 / static_cast<double>(particles.size());
    std::vector<double> weights(particles.size(), w);
    return {std::move(particles), std::move(weights)};
}

double ParticleBelief::total_weight() const {
    return std::accumulate(weights.begin(), weights.end(), 0.0);
}

State ParticleBelief::mean() const {
    State m = State::Zero(particles.front().size());
    double total = 0.0;
    for (std::size_t j = 0; j < size(); ++j) {
        m += weights[j] * particles[j];
        total += weights[j];
    }
    return m / total;
}

bool ParticleBelief::all_terminal(const ProblemModel& model) const {
    for (std::size_t j = 0; j < size(); ++j) {
        if (weights[j] > 0.0 && !model.is_terminal(particles[j])) return false;
    }
    return true;
}

PropagatedBelief propagate(const ParticleBelief& b, const Action& a, const ProblemModel& model,
                           Rng& rng, bool cache_densities) {
    const std::size_t n = b.size();
    PropagatedBelief out;
    out.particles.reserve(n);
    out.caches.reserve(n);
    out.log_densities.assign(n, 0.0);
    out.absorbed.assign(n, 0);
    out.weights = b.weights;
    out.action = a;
    double reward = 0.0;
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const State& s = b.particles[j];
        total += b.weights[j];
        if (model.is_terminal(s)) {
            out.particles.push_back(s);
            out.caches.emplace_back();
            out.absorbed[j] = 1;
            continue;
        }
        auto t = model.sample_transition(s, a, rng);
        if (cache_densities) {
            out.log_densities[j] = model.log_transition_density(s, a, t.next, t.cache);
        }
        reward += b.weights[j] * t.reward;
        out.particles.push_back(std::move(t.next));
        out.caches.push_back(std::move(t.cache));
    }
    out.reward = total > 0.0 ? reward / total : 0.0;
    return out;
}

double effective_sample_size(const std::vector<double>& weights) {
    double s = 0.0;
    double s2 = 0.0;
    for (double w : weights) {
        s += w;
        s2 += w * w;
    }
    return s2 > 0.0 ? s * s / s2 : 0.0;
}

std::vector<std::size_t> systematic_indices(const std::vector<double>& weights, std::size_t count,
                                            Rng& rng) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<std::size_t> idx(count);
    const double step = total / static_cast<double>(count);
    double u = rng.uniform() * step;
    double cum = weights.empty() ? 0.0 : weights[0];
    std::size_t j = 0;
    for (std::size_t i = 0; i < count; ++i) {
        while (u > cum && j + 1 < weights.size()) cum += weights[++j];
        idx[i] = j;
        u += step;
    }
    return idx;
}

ParticleBelief reweight(const ParticleBelief& b, const Observation& o, const ProblemModel& model) {
    const std::size_t n = b.size();
    std::vector<double> logw(n);
    double m = kNegInf;
    for (std::size_t j = 0; j < n; ++j) {
        logw[j] = b.weights[j] > 0.0
                      ? std::log(b.weights[j]) + model.log_observation_density(b.particles[j], o)
                      : kNegInf;
        m = std::max(m, logw[j]);
    }
    if (m == kNegInf || std::isnan(m)) throw DegenerateBelief("every particle has zero likelihood");
    ParticleBelief out{b.particles, std::vector<double>(n)};
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        out.weights[j] = std::exp(logw[j] - m);
        total += out.weights[j];
    }
    for (double& w : out.weights) w /= total;
    return out;
}

ParticleBelief systematic_resample(const ParticleBelief& b, Rng& rng) {
    const auto idx = systematic_indices(b.weights, b.size(), rng);
    std::vector<State> particles;
    particles.reserve(idx.size());
    for (std::size_t i : idx) particles.push_back(b.particles[i]);
    return ParticleBelief::uniform(std::move(particles));
}

ParticleBelief reweight_and_resample(const PropagatedBelief& bm, const Observation& o,
                                     const ProblemModel& model, Rng& rng) {
    return systematic_resample(reweight(bm.as_belief(), o, model), rng);
}

ParticleBelief subsample(const ParticleBelief& b, std::size_t count, Rng& rng) {
    if (count >= b.size()) return b;
    std::vector<std::size_t> idx(b.size());
    std::iota(idx.begin(), idx.end(), 0);
    // Partial Fisher-Yates.
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t k = i + rng.index(b.size() - i);
        std::swap(idx[i], idx[k]);
    }
    ParticleBelief out;
    out.particles.reserve(count);
    out.weights.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        out.particles.push_back(b.particles[idx[i]]);
        out.weights.push_back(b.weights[idx[i]]);
    }
    return out;
}

double propagated_log_likelihood(const ParticleBelief& b, const Action& a,
                                 const PropagatedBelief& bm, const ProblemModel& model) {
    const bool cached = a.size() == bm.action.size() && a == bm.action;
    double total = 0.0;
    for (std::size_t j = 0; j < bm.size(); ++j) {
        if (bm.absorbed[j]) continue;
        total += cached ? bm.log_densities[j]
                        : model.log_transition_density(b.particles[j], a, bm.particles[j],
                                                       bm.caches[j]);
    }
    return total;
}

LikelihoodGrad propagated_log_likelihood_grad(const ParticleBelief& b, const Action& a,
                                              const PropagatedBelief& bm, int k,
                                              const ProblemModel& model, Rng& rng) {
    const std::size_t n = bm.size();
    LikelihoodGrad out{Vec::Zero(a.size()), 0, 0};
    const bool exact = k <= 0 || static_cast<std::size_t>(k) >= n;
    const std::size_t draws = exact ? n : static_cast<std::size_t>(k);
    for (std::size_t l = 0; l < draws; ++l) {
        const std::size_t j = exact ? l : rng.index(n);
        if (bm.absorbed[j]) {
            ++out.used;
            continue;
        }
        try {
            out.grad += model.grad_log_transition_density(b.particles[j], a, bm.particles[j],
                                                          bm.caches[j]);
            ++out.used;
        } catch (const NondifferentiablePoint&) {
            ++out.skipped;
        }
    }
    if (out.used == 0) {
        out.grad.setZero();
        return out;
    }
    if (!exact || out.skipped > 0) {
        out.grad *= static_cast<double>(n) / static_cast<double>(out.used);
    }
    return out;
}

RewardGrad belief_reward(const ParticleBelief& b, const Action& a, const PropagatedBelief& bm,
                         const ProblemModel& model, bool want_grad) {
    RewardGrad out{0.0, Vec::Zero(a.size())};
    double total = 0.0;
    for (std::size_t j = 0; j < bm.size(); ++j) {
        total += bm.weights[j];
        if (bm.absorbed[j]) continue;
        const auto r = model.reward_and_grad(b.particles[j], a, bm.particles[j]);
        out.reward += bm.weights[j] * r.reward;
        if (want_grad) out.grad += bm.weights[j] * r.grad;
    }
    if (total > 0.0) {
        out.reward /= total;
        out.grad /= total;
    }
    return out;
}

}  // namespace agmcts
