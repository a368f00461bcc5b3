#include "agmcts/domains.hpp"

#include <cmath>
#include <memory>

namespace agmcts {
namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double car_reward(const CarBounds& b, const State& next) {
    if (next[0] >= b.x_max) return b.goal_reward;
    if (next[0] < b.x_min || std::abs(next[1]) >= b.v_max) return b.crash_reward;
    return b.step_reward;
}

bool car_terminal(const CarBounds& b, const State& s) {
    return s[0] >= b.x_max || s[0] < b.x_min || std::abs(s[1]) >= b.v_max;
}

Action scalar_action(double a) {
    Action out(1);
    out[0] = a;
    return out;
}

Observation scalar_obs(double z) {
    Observation o(1);
    o[0] = z;
    return o;
}

ClippedActionNoise scalar_clipped_noise(double sigma, double a_max) {
    return {Vec::Constant(1, sigma), Vec::Constant(1, -a_max), Vec::Constant(1, a_max)};
}

}  // namespace

// ----------------------------------------------------------------- light-dark

LightDark::LightDark(LightDarkParams p) : p_(p) {
    if (p_.dim < 1 || p_.dim > kMaxDim) throw ConfigError("light-dark dimension out of range");
    info_.name = "lightdark" + std::to_string(p_.dim);
    info_.state_dim = p_.dim;
    info_.action_dim = p_.dim;
    info_.obs_dim = p_.dim;
    info_.discount = p_.discount;
    info_.horizon = p_.horizon;
    info_.has_observations = true;
    info_.exact_density = true;
    info_.density_gradient = true;
    info_.posterior_only_reward = true;
    info_.measure = ReferenceMeasure::Lebesgue;
    action_set_ = ActionSet::ball(p_.dim, p_.action_radius);
    goal_ = Vec::Zero(p_.dim);
    goal_[p_.dim - 1] = p_.goal_distance;
    beacon_ = Vec::Zero(p_.dim);
    beacon_[0] = p_.beacon_distance;
}

double LightDark::sigma_obs(double beacon_dist) const {
    const double s =
        std::min(p_.sigma_obs_max,
                 p_.k_sigma_obs * (beacon_dist + std::pow(beacon_dist, p_.alpha_sigma_obs)));
    return std::max(s, p_.sigma_obs_floor);
}

double LightDark::reward_at(const State& next) const {
    const double d = (next - goal_).norm();
    const double t = p_.goal_tolerance;
    const double zg = d / (0.5 * t);
    const double zm = (d - 5.0 * t) / t;
    return p_.goal_reward * std::exp(-0.5 * zg * zg) - p_.moat_reward * std::exp(-0.5 * zm * zm) -
           p_.distance_cost * d * d;
}

State LightDark::sample_initial_state(Rng& rng) const {
    State g(p_.dim);
    double n = 0.0;
    while (n == 0.0) {
        for (int i = 0; i < p_.dim; ++i) g[i] = rng.normal();
        n = g.norm();
    }
    return g * (p_.start_radius / n);
}

bool LightDark::is_terminal(const State& s) const {
    return (s - goal_).norm() < p_.goal_tolerance;
}

TransitionSample LightDark::sample_transition(const State& s, const Action& a, Rng& rng) const {
    TransitionSample out;
    out.next = s + a;
    for (int i = 0; i < p_.dim; ++i) out.next[i] += p_.sigma_transition * rng.normal();
    out.reward = reward_at(out.next);
    return out;
}

double LightDark::log_transition_density(const State& s, const Action& a, const State& next,
                                         const TransitionCache&) const {
    const double sig = p_.sigma_transition;
    const double q = (next - s - a).squaredNorm() / (sig * sig);
    return -0.5 * q - p_.dim * (kLogSqrt2Pi + std::log(sig));
}

Vec LightDark::grad_log_transition_density(const State& s, const Action& a, const State& next,
                                           const TransitionCache&) const {
    const double sig = p_.sigma_transition;
    return (next - s - a) / (sig * sig);
}

RewardGrad LightDark::reward_and_grad(const State&, const Action& a, const State& next) const {
    return {reward_at(next), Vec::Zero(a.size())};
}

Observation LightDark::sample_observation(const State& next, Rng& rng) const {
    const Vec rel = next - beacon_;
    const double sig = sigma_obs(rel.norm());
    Observation o = rel;
    for (int i = 0; i < p_.dim; ++i) o[i] += sig * rng.normal();
    return o;
}

double LightDark::log_observation_density(const State& next, const Observation& o) const {
    const Vec rel = next - beacon_;
    const double sig = sigma_obs(rel.norm());
    const double q = (o - rel).squaredNorm() / (sig * sig);
    return -0.5 * q - p_.dim * (kLogSqrt2Pi + std::log(sig));
}

Action LightDark::rollout_action(const State& s, Rng& rng) const {
    Action a = goal_ - s;
    const double n = a.norm();
    if (n > p_.action_radius) a *= p_.action_radius / n;
    for (int i = 0; i < p_.dim; ++i) a[i] += p_.rollout_sigma * rng.normal();
    return action_set_.project(a);
}

// -------------------------------------------------------------- mountain car

MountainCar::MountainCar(MountainCarParams p)
    : p_(p), noise_(scalar_clipped_noise(p.sigma_nu, p.bounds.a_max)) {
    info_.name = p_.pomdp ? "mountaincar-pomdp" : "mountaincar-mdp";
    info_.state_dim = 2;
    info_.action_dim = 1;
    info_.obs_dim = p_.pomdp ? 1 : 0;
    info_.discount = p_.discount;
    info_.horizon = p_.horizon;
    info_.has_observations = p_.pomdp;
    info_.exact_density = true;
    info_.density_gradient = true;
    info_.posterior_only_reward = true;
    info_.measure = ReferenceMeasure::MixtureWithAtoms;
    action_set_ = ActionSet::box(Vec::Constant(1, -p_.bounds.a_max), Vec::Constant(1, p_.bounds.a_max));
}

State MountainCar::dynamics(const State& s, double realized_action) const {
    State next(2);
    next[1] = s[1] + 0.001 * realized_action - 0.0025 * std::cos(3.0 * s[0]);
    next[0] = s[0] + next[1];
    return next;
}

double MountainCar::invert_action(const State& s, const State& next) const {
    if (std::abs(next[0] - (s[0] + next[1])) > kClipTolerance * std::max(1.0, std::abs(next[0]))) {
        return std::nan("");
    }
    return (next[1] - s[1] + 0.0025 * std::cos(3.0 * s[0])) / 0.001;
}

State MountainCar::sample_initial_state(Rng& rng) const {
    State s(2);
    s[0] = rng.uniform(p_.init_x_lo, p_.init_x_hi);
    s[1] = 0.0;
    return s;
}

bool MountainCar::is_terminal(const State& s) const { return car_terminal(p_.bounds, s); }

TransitionSample MountainCar::sample_transition(const State& s, const Action& a, Rng& rng) const {
    const double realized =
        std::clamp(a[0] + p_.sigma_nu * rng.normal(), -p_.bounds.a_max, p_.bounds.a_max);
    TransitionSample out;
    out.next = dynamics(s, realized);
    out.reward = car_reward(p_.bounds, out.next);
    return out;
}

DensityGrad MountainCar::density(const State& s, const Action& a, const State& next,
                                 bool want_grad) const {
    const double realized = invert_action(s, next);
    if (std::isnan(realized)) return {kNegInf, Vec::Zero(1)};
    Mat jac(2, 1);
    jac << 0.001, 0.001;
    return input_noise_density(noise_, scalar_action(realized), jac, a, want_grad);
}

double MountainCar::log_transition_density(const State& s, const Action& a, const State& next,
                                           const TransitionCache&) const {
    return density(s, a, next, false).log_density;
}

Vec MountainCar::grad_log_transition_density(const State& s, const Action& a, const State& next,
                                             const TransitionCache&) const {
    const auto d = density(s, a, next, true);
    if (d.log_density == kNegInf) throw NondifferentiablePoint("transition outside the support");
    return d.grad;
}

RewardGrad MountainCar::reward_and_grad(const State&, const Action&, const State& next) const {
    return {car_reward(p_.bounds, next), Vec::Zero(1)};
}

Observation MountainCar::sample_observation(const State& next, Rng& rng) const {
    if (!p_.pomdp) return ProblemModel::sample_observation(next, rng);
    return scalar_obs(next[0] + p_.sigma_obs * rng.normal());
}

double MountainCar::log_observation_density(const State& next, const Observation& o) const {
    if (!p_.pomdp) return ProblemModel::log_observation_density(next, o);
    return normal_logpdf(o[0] - next[0], p_.sigma_obs);
}

Action MountainCar::rollout_action(const State& s, Rng&) const {
    return scalar_action(s[1] > 0.0 ? p_.bounds.a_max : -p_.bounds.a_max);
}

// ------------------------------------------------------------------ hill car

HillCar::HillCar(HillCarParams p)
    : p_(p),
      noise_(scalar_clipped_noise(p.sigma_nu, p.bounds.a_max)),
      substeps_(static_cast<int>(std::lround(p.dt / p.dt_inner))) {
    if (substeps_ < 1 || std::abs(substeps_ * p_.dt_inner - p_.dt) > 1e-12) {
        throw ConfigError("hill car inner step must divide the environment step");
    }
    info_.name = p_.pomdp ? "hillcar-pomdp" : "hillcar-mdp";
    info_.state_dim = 2;
    info_.action_dim = 1;
    info_.obs_dim = p_.pomdp ? 1 : 0;
    info_.discount = p_.discount;
    info_.horizon = p_.horizon;
    info_.has_observations = p_.pomdp;
    info_.exact_density = true;
    info_.density_gradient = true;
    info_.posterior_only_reward = true;
    info_.measure = ReferenceMeasure::MixtureWithAtoms;
    action_set_ = ActionSet::box(Vec::Constant(1, -p_.bounds.a_max), Vec::Constant(1, p_.bounds.a_max));
}

double HillCar::slope(double x) {
    if (x < 0.0) return 2.0 * x + 1.0;
    return std::pow(1.0 + 5.0 * x * x, -1.5);
}

double HillCar::curvature(double x) {
    if (x < 0.0) return 2.0;
    return -15.0 * x * std::pow(1.0 + 5.0 * x * x, -2.5);
}

State HillCar::dynamics(const State& s, double realized_action) const {
    const auto xv = propagate<double>(s[0], s[1], realized_action, substeps_);
    State next(2);
    next << xv[0], xv[1];
    return next;
}

State HillCar::sample_initial_state(Rng& rng) const {
    State s(2);
    s[0] = rng.uniform(p_.init_x_lo, p_.init_x_hi);
    s[1] = 0.0;
    return s;
}

bool HillCar::is_terminal(const State& s) const { return car_terminal(p_.bounds, s); }

TransitionSample HillCar::sample_transition(const State& s, const Action& a, Rng& rng) const {
    const double realized =
        std::clamp(a[0] + p_.sigma_nu * rng.normal(), -p_.bounds.a_max, p_.bounds.a_max);
    using D1 = Dual<1>;
    const auto xv = propagate<D1>(D1(s[0]), D1(s[1]), D1::variable(realized, 0), substeps_);
    TransitionSample out;
    out.next = State(2);
    out.next << xv[0].v, xv[1].v;
    out.reward = car_reward(p_.bounds, out.next);
    out.cache = TransitionCache(3);
    out.cache << realized, xv[0].d[0], xv[1].d[0];
    return out;
}

DensityGrad HillCar::density(const Action& a, const TransitionCache& cache, bool want_grad) const {
    if (cache.size() != 3) {
        throw UnsupportedDensity("hill car densities need the cache recorded when s' was sampled");
    }
    Mat jac(2, 1);
    jac << cache[1], cache[2];
    return input_noise_density(noise_, scalar_action(cache[0]), jac, a, want_grad);
}

double HillCar::log_transition_density(const State&, const Action& a, const State&,
                                       const TransitionCache& cache) const {
    return density(a, cache, false).log_density;
}

Vec HillCar::grad_log_transition_density(const State&, const Action& a, const State&,
                                         const TransitionCache& cache) const {
    const auto d = density(a, cache, true);
    if (d.log_density == kNegInf) throw NondifferentiablePoint("transition outside the support");
    return d.grad;
}

RewardGrad HillCar::reward_and_grad(const State&, const Action&, const State& next) const {
    return {car_reward(p_.bounds, next), Vec::Zero(1)};
}

Observation HillCar::sample_observation(const State& next, Rng& rng) const {
    if (!p_.pomdp) return ProblemModel::sample_observation(next, rng);
    return scalar_obs(next[0] + p_.sigma_obs * rng.normal());
}

double HillCar::log_observation_density(const State& next, const Observation& o) const {
    if (!p_.pomdp) return ProblemModel::log_observation_density(next, o);
    return normal_logpdf(o[0] - next[0], p_.sigma_obs);
}

Action HillCar::rollout_action(const State& s, Rng&) const {
    return scalar_action(s[1] > 0.0 ? p_.bounds.a_max : -p_.bounds.a_max);
}

// -------------------------------------------------------------- lunar lander

LunarLander::LunarLander(LunarLanderParams p) : p_(p), g_(Mat::Zero(6, 3)) {
    info_.name = p_.pomdp ? "lander-pomdp" : "lander-mdp";
    info_.state_dim = 6;
    info_.action_dim = 3;
    info_.obs_dim = p_.pomdp ? 3 : 0;
    info_.discount = p_.discount;
    info_.horizon = p_.horizon;
    info_.has_observations = p_.pomdp;
    info_.exact_density = true;
    info_.density_gradient = true;
    info_.posterior_only_reward = true;
    info_.measure = ReferenceMeasure::Hausdorff;
    Vec lo(3);
    Vec hi(3);
    lo << -p_.fx_max, 0.0, -p_.delta_max;
    hi << p_.fx_max, p_.thrust_max, p_.delta_max;
    action_set_ = ActionSet::box(lo, hi);
    g_(3, 0) = p_.q4;
    g_(4, 1) = p_.q5;
    g_(5, 2) = p_.q6;
}

State LunarLander::mean_dynamics(const State& s, const Action& a) const {
    const double th = s[2];
    const double fx = std::cos(th) * a[0] - std::sin(th) * a[1];
    const double fz = std::cos(th) * a[1] + std::sin(th) * a[0];
    const double torque = -a[2] * a[0];
    State n(6);
    n[0] = s[0] + s[3] * p_.dt;
    n[1] = s[1] + s[4] * p_.dt;
    n[2] = s[2] + s[5] * p_.dt;
    n[3] = s[3] + fx / p_.mass * p_.dt;
    n[4] = s[4] + (fz / p_.mass - p_.gravity) * p_.dt;
    n[5] = s[5] + torque / p_.inertia * p_.dt;
    return n;
}

Mat LunarLander::action_jacobian(const State& s, const Action& a) const {
    const double c = std::cos(s[2]);
    const double sn = std::sin(s[2]);
    Mat j = Mat::Zero(6, 3);
    j(3, 0) = c * p_.dt / p_.mass;
    j(3, 1) = -sn * p_.dt / p_.mass;
    j(4, 0) = sn * p_.dt / p_.mass;
    j(4, 1) = c * p_.dt / p_.mass;
    j(5, 0) = -a[2] * p_.dt / p_.inertia;
    j(5, 2) = -a[0] * p_.dt / p_.inertia;
    return j;
}

State LunarLander::sample_initial_state(Rng& rng) const {
    State s(6);
    for (int i = 0; i < 6; ++i) s[i] = p_.init_mean[i] + p_.init_sd[i] * rng.normal();
    return s;
}

bool LunarLander::is_terminal(const State& s) const {
    return std::abs(s[0]) >= p_.x_limit || std::abs(s[2]) >= p_.theta_limit ||
           s[1] <= p_.landing_height;
}

TransitionSample LunarLander::sample_transition(const State& s, const Action& a, Rng& rng) const {
    TransitionSample out;
    out.next = mean_dynamics(s, a);
    out.next[3] += p_.q4 * rng.normal();
    out.next[4] += p_.q5 * rng.normal();
    out.next[5] += p_.q6 * rng.normal();
    out.reward = reward_and_grad(s, a, out.next).reward;
    return out;
}

double LunarLander::log_transition_density(const State& s, const Action& a, const State& next,
                                           const TransitionCache&) const {
    return output_noise_density(g_, mean_dynamics(s, a), action_jacobian(s, a), next, false)
        .log_density;
}

Vec LunarLander::grad_log_transition_density(const State& s, const Action& a, const State& next,
                                             const TransitionCache&) const {
    const auto d = output_noise_density(g_, mean_dynamics(s, a), action_jacobian(s, a), next, true);
    if (d.log_density == kNegInf) throw NondifferentiablePoint("transition outside the support");
    return d.grad;
}

RewardGrad LunarLander::reward_and_grad(const State&, const Action& a, const State& next) const {
    RewardGrad out{-1.0, Vec::Zero(a.size())};
    if (std::abs(next[0]) >= p_.x_limit || std::abs(next[2]) >= p_.theta_limit) {
        out.reward = -1000.0;
    } else if (next[1] <= p_.landing_height) {
        out.reward = 100.0 - std::abs(next[0]) - next[4] * next[4];
    }
    return out;
}

Observation LunarLander::sample_observation(const State& next, Rng& rng) const {
    if (!p_.pomdp) return ProblemModel::sample_observation(next, rng);
    Observation o(3);
    o << next[1] + p_.sigma_obs[0] * rng.normal(), next[5] + p_.sigma_obs[1] * rng.normal(),
        next[3] + p_.sigma_obs[2] * rng.normal();
    return o;
}

double LunarLander::log_observation_density(const State& next, const Observation& o) const {
    if (!p_.pomdp) return ProblemModel::log_observation_density(next, o);
    return normal_logpdf(o[0] - next[1], p_.sigma_obs[0]) +
           normal_logpdf(o[1] - next[5], p_.sigma_obs[1]) +
           normal_logpdf(o[2] - next[3], p_.sigma_obs[2]);
}

Action LunarLander::rollout_action(const State& s, Rng&) const {
    Action a(3);
    a << -0.1 * s[3], -0.1 * s[4], 0.0;
    return action_set_.project(a);
}

// ------------------------------------------------------------------ registry

ModelPtr make_domain(const std::string& name) {
    if (name == "lightdark2" || name == "lightdark3" || name == "lightdark4") {
        LightDarkParams p;
        p.dim = name.back() - '0';
        return std::make_shared<LightDark>(p);
    }
    if (name == "mountaincar-mdp" || name == "mountaincar-pomdp") {
        MountainCarParams p;
        p.pomdp = name == "mountaincar-pomdp";
        return std::make_shared<MountainCar>(p);
    }
    if (name == "hillcar-mdp" || name == "hillcar-pomdp") {
        HillCarParams p;
        p.pomdp = name == "hillcar-pomdp";
        return std::make_shared<HillCar>(p);
    }
    if (name == "lander-mdp" || name == "lander-pomdp") {
        LunarLanderParams p;
        p.pomdp = name == "lander-pomdp";
        return std::make_shared<LunarLander>(p);
    }
    throw ConfigError("unknown domain '" + name + "'");
}

std::vector<std::string> domain_names() {
    return {"lightdark2",    "lightdark3",        "lightdark4",
            "mountaincar-mdp", "mountaincar-pomdp", "hillcar-mdp",
            "hillcar-pomdp", "lander-mdp",        "lander-pomdp"};
}

}  // namespace agmcts
