#pragma once

#include "agmcts/density.hpp"
#include "agmcts/dual.hpp"
#include "agmcts/model.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace agmcts {

struct LightDarkParams {
    int dim = 2;
    double action_radius = 1.5;  // r_a
    double goal_distance = 2.5;  // r_g
    double beacon_distance = 2.5;  // r_b
    double start_radius = 0.5;  // r_0
    double goal_tolerance = 0.2;  // T
    int horizon = 6;
    double discount = 0.99;
    double sigma_transition = 0.025;
    double sigma_obs_max = 15.0;
    double k_sigma_obs = 0.01;
    double alpha_sigma_obs = 8.0;
    double sigma_obs_floor = 1e-6;
    double goal_reward = 10.0;
    double moat_reward = 2.0;
    double distance_cost = 0.02;
    double rollout_sigma = 0.1;
};

// D-dimensional light-dark localization problem. The goal sits on the last
// axis, the beacon on the first; observation noise collapses near the beacon.
class LightDark final : public ProblemModel {
public:
    explicit LightDark(LightDarkParams p = {});

    const LightDarkParams& params() const { return p_; }
    const Vec& goal() const { return goal_; }
    const Vec& beacon() const { return beacon_; }
    double sigma_obs(double beacon_dist) const;
    double reward_at(const State& next) const;

    State sample_initial_state(Rng& rng) const override;
    bool is_terminal(const State& s) const override;
    TransitionSample sample_transition(const State& s, const Action& a, Rng& rng) const override;
    double log_transition_density(const State& s, const Action& a, const State& next,
                                  const TransitionCache& cache) const override;
    Vec grad_log_transition_density(const State& s, const Action& a, const State& next,
                                    const TransitionCache& cache) const override;
    RewardGrad reward_and_grad(const State& s, const Action& a, const State& next) const override;
    Observation sample_observation(const State& next, Rng& rng) const override;
    double log_observation_density(const State& next, const Observation& o) const override;
    Action rollout_action(const State& s, Rng& rng) const override;

private:
    LightDarkParams p_;
    Vec goal_;
    Vec beacon_;
};

// Shared shape of the two car domains: clipped additive action noise,
// terminal goal/crash rewards and a bang-bang rollout.
struct CarBounds {
    double x_min;
    double x_max;
    double v_max;
    double a_max;
    double goal_reward = 100.0;
    double crash_reward = -100.0;
    double step_reward = -0.1;
};

struct MountainCarParams {
    CarBounds bounds{-1.5, 0.5, 0.05, 1.0};
    double sigma_nu = 0.1;
    int horizon = 200;
    double discount = 0.99;
    double sigma_obs = 0.03;
    double init_x_lo = -0.9;
    double init_x_hi = -0.5;
    bool pomdp = false;
};

class MountainCar final : public ProblemModel {
public:
    explicit MountainCar(MountainCarParams p = {});

    const MountainCarParams& params() const { return p_; }
    State dynamics(const State& s, double realized_action) const;
    // The realized (clipped) action that maps s to next, or NaN when next is
    // off the reachable line x' = x + v'.
    double invert_action(const State& s, const State& next) const;

    State sample_initial_state(Rng& rng) const override;
    bool is_terminal(const State& s) const override;
    TransitionSample sample_transition(const State& s, const Action& a, Rng& rng) const override;
    double log_transition_density(const State& s, const Action& a, const State& next,
                                  const TransitionCache& cache) const override;
    Vec grad_log_transition_density(const State& s, const Action& a, const State& next,
                                    const TransitionCache& cache) const override;
    RewardGrad reward_and_grad(const State& s, const Action& a, const State& next) const override;
    Observation sample_observation(const State& next, Rng& rng) const override;
    double log_observation_density(const State& next, const Observation& o) const override;
    Action rollout_action(const State& s, Rng& rng) const override;

private:
    DensityGrad density(const State& s, const Action& a, const State& next, bool want_grad) const;

    MountainCarParams p_;
    ClippedActionNoise noise_;
};

struct HillCarParams {
    CarBounds bounds{-1.0, 1.0, 2.5, 4.0};
    double sigma_nu = 0.1;
    int horizon = 30;
    double discount = 0.99;
    double mass = 1.0;
    double gravity = 9.81;
    double dt_inner = 0.01;
    double dt = 0.1;
    double sigma_obs = 0.03;
    double init_x_lo = -0.6;
    double init_x_hi = -0.4;
    bool pomdp = false;
};

class HillCar final : public ProblemModel {
public:
    explicit HillCar(HillCarParams p = {});

    const HillCarParams& params() const { return p_; }

    template <class T>
    T accel(const T& x, const T& v, const T& a) const;

    // One environment step of fixed-step RK4 from (x, v) under constant a.
    template <class T>
    std::array<T, 2> propagate(T x, T v, const T& a, int substeps) const;

    State dynamics(const State& s, double realized_action) const;
    int substeps() const { return substeps_; }

    State sample_initial_state(Rng& rng) const override;
    bool is_terminal(const State& s) const override;
    // The cache holds (a~, dx'/da~, dv'/da~).
    TransitionSample sample_transition(const State& s, const Action& a, Rng& rng) const override;
    double log_transition_density(const State& s, const Action& a, const State& next,
                                  const TransitionCache& cache) const override;
    Vec grad_log_transition_density(const State& s, const Action& a, const State& next,
                                    const TransitionCache& cache) const override;
    RewardGrad reward_and_grad(const State& s, const Action& a, const State& next) const override;
    Observation sample_observation(const State& next, Rng& rng) const override;
    double log_observation_density(const State& next, const Observation& o) const override;
    Action rollout_action(const State& s, Rng& rng) const override;

    static double slope(double x);
    static double curvature(double x);

private:
    DensityGrad density(const Action& a, const TransitionCache& cache, bool want_grad) const;

    HillCarParams p_;
    ClippedActionNoise noise_;
    int substeps_;
};

struct LunarLanderParams {
    double fx_max = 5.0;
    double thrust_max = 15.0;
    double delta_max = 1.0;
    double q4 = 0.1;
    double q5 = 0.1;
    double q6 = 0.01;
    double mass = 1.0;
    double inertia = 10.0;
    double dt = 0.4;
    double gravity = 9.0;
    std::array<double, 3> sigma_obs{1.0, 0.01, 0.1};  // (height, angular rate, horizontal speed)
    std::array<double, 6> init_mean{0.0, 50.0, 0.0, 0.0, -10.0, 0.0};
    std::array<double, 6> init_sd{1.0, 1.0, 0.01, 0.1, 0.1, 0.01};
    double x_limit = 15.0;
    double theta_limit = 0.5;
    double landing_height = 1.0;
    int horizon = 100;
    double discount = 0.99;
    bool pomdp = false;
};

// State (x, y, theta, xdot, ydot, omega); action (F_x, T, delta).
class LunarLander final : public ProblemModel {
public:
    explicit LunarLander(LunarLanderParams p = {});

    const LunarLanderParams& params() const { return p_; }
    State mean_dynamics(const State& s, const Action& a) const;
    Mat action_jacobian(const State& s, const Action& a) const;
    const Mat& noise_map() const { return g_; }

    State sample_initial_state(Rng& rng) const override;
    bool is_terminal(const State& s) const override;
    TransitionSample sample_transition(const State& s, const Action& a, Rng& rng) const override;
    double log_transition_density(const State& s, const Action& a, const State& next,
                                  const TransitionCache& cache) const override;
    Vec grad_log_transition_density(const State& s, const Action& a, const State& next,
                                    const TransitionCache& cache) const override;
    RewardGrad reward_and_grad(const State& s, const Action& a, const State& next) const override;
    Observation sample_observation(const State& next, Rng& rng) const override;
    double log_observation_density(const State& next, const Observation& o) const override;
    Action rollout_action(const State& s, Rng& rng) const override;

private:
    LunarLanderParams p_;
    Mat g_;
};

ModelPtr make_domain(const std::string& name);
std::vector<std::string> domain_names();

// ---------------------------------------------------------------------------

template <class T>
T HillCar::accel(const T& x, const T& v, const T& a) const {
    using std::pow;
    T hp;
    T hpp;
    if (value_of(x) < 0.0) {
        hp = 2.0 * x + 1.0;
        hpp = T(2.0);
    } else {
        const T q = 1.0 + 5.0 * x * x;
        hp = pow(q, -1.5);
        hpp = -15.0 * x * pow(q, -2.5);
    }
    return (a / p_.mass - p_.gravity * hp - v * v * hp * hpp) / (1.0 + hp * hp);
}

template <class T>
std::array<T, 2> HillCar::propagate(T x, T v, const T& a, int substeps) const {
    const double h = p_.dt / substeps;
    for (int i = 0; i < substeps; ++i) {
        const T k1x = v;
        const T k1v = accel(x, v, a);
        const T k2x = v + 0.5 * h * k1v;
        const T k2v = accel(x + 0.5 * h * k1x, v + 0.5 * h * k1v, a);
        const T k3x = v + 0.5 * h * k2v;
        const T k3v = accel(x + 0.5 * h * k2x, v + 0.5 * h * k2v, a);
        const T k4x = v + h * k3v;
        const T k4v = accel(x + h * k3x, v + h * k3v, a);
        x = x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if (std::abs(value_of(x)) > 10.0 || std::abs(value_of(v)) > 100.0) {
            throw IntegrationBlowup("hill car integration left the sanity box");
        }
    }
    return {x, v};
}

}  // namespace agmcts
