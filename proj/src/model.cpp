#include "agmcts/model.hpp"

#include <cmath>

namespace agmcts {

ActionSet ActionSet::box(const Vec& lower, const Vec& upper) {
    if (lower.size() != upper.size() || (lower.array() > upper.array()).any()) {
        throw ConfigError("action box bounds must be ordered and of equal length");
    }
    ActionSet s;
    s.kind = ActionSetKind::Box;
    s.lower = lower;
    s.upper = upper;
    return s;
}

ActionSet ActionSet::ball(int dim, double radius) {
    ActionSet s;
    s.kind = ActionSetKind::Ball;
    s.lower = Vec::Constant(dim, -radius);
    s.upper = Vec::Constant(dim, radius);
    s.radius = radius;
    return s;
}

int ActionSet::dim() const { return static_cast<int>(lower.size()); }

bool ActionSet::contains(const Action& a, double tol) const {
    if (a.size() != lower.size()) return false;
    if (kind == ActionSetKind::Ball) return a.norm() <= radius + tol;
    return ((a.array() >= lower.array() - tol) && (a.array() <= upper.array() + tol)).all();
}

Action ActionSet::project(const Action& a) const {
    if (kind == ActionSetKind::Ball) {
        const double n = a.norm();
        return n > radius ? Action(a * (radius / n)) : a;
    }
    return a.cwiseMax(lower).cwiseMin(upper);
}

Action ActionSet::sample_uniform(Rng& rng) const {
    Action a(dim());
    while (true) {
        for (int i = 0; i < dim(); ++i) a[i] = rng.uniform(lower[i], upper[i]);
        if (kind == ActionSetKind::Box || a.norm() <= radius) return a;
    }
}

double ProblemModel::log_transition_density(const State&, const Action&, const State&,
                                            const TransitionCache&) const {
    throw UnsupportedDensity(info_.name + " has no exact transition density");
}

Vec ProblemModel::grad_log_transition_density(const State&, const Action&, const State&,
                                              const TransitionCache&) const {
    throw UnsupportedGradient(info_.name + " has no transition density gradient");
}

Observation ProblemModel::sample_observation(const State&, Rng&) const {
    throw NotAPomdp(info_.name + " has no observation model");
}

double ProblemModel::log_observation_density(const State&, const Observation&) const {
    throw NotAPomdp(info_.name + " has no observation model");
}

}  // namespace agmcts
