#include "agmcts/density.hpp"

#include "agmcts/lse.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <vector>

namespace agmcts {
namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;
constexpr double kSqrt1_2 = 0.70710678118654752440;

// 1 - 1/z^2 + 3/z^4 - 15/z^6 + ... for the lower-tail asymptotics of Phi.
double tail_series(double z) {
    const double w = 1.0 / (z * z);
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k <= 6; ++k) {
        term *= -static_cast<double>(2 * k - 1) * w;
        sum += term;
    }
    return sum;
}

constexpr double kTailSwitch = -20.0;

}  // namespace

double normal_logpdf(double x, double sigma) {
    const double z = x / sigma;
    return -0.5 * z * z - kLogSqrt2Pi - std::log(sigma);
}

double std_normal_log_cdf(double z) {
    if (z > kTailSwitch) return std::log(0.5 * std::erfc(-z * kSqrt1_2));
    return -0.5 * z * z - kLogSqrt2Pi - std::log(-z) + std::log(tail_series(z));
}

double std_normal_log_sf(double z) { return std_normal_log_cdf(-z); }

double std_normal_mills(double z) {
    if (z > kTailSwitch) return std::exp(-0.5 * z * z - kLogSqrt2Pi - std_normal_log_cdf(z));
    return -z / tail_series(z);
}

ClippedMass clipped_gaussian_logmass(double sigma, double nu, double lo, double hi, double tol) {
    if (nu < lo - tol || nu > hi + tol) return {kNegInf, MassComponent::OutOfSupport};
    if (nu <= lo + tol) return {std_normal_log_cdf(lo / sigma), MassComponent::AtomLow};
    if (nu >= hi - tol) return {std_normal_log_sf(hi / sigma), MassComponent::AtomHigh};
    return {normal_logpdf(nu, sigma), MassComponent::Continuous};
}

double clipped_gaussian_logmass_shift_grad(double sigma, double nu, double lo, double hi,
                                           MassComponent component) {
    switch (component) {
        case MassComponent::Continuous:
            return nu / (sigma * sigma);
        case MassComponent::AtomLow:
            return -std_normal_mills(lo / sigma) / sigma;
        case MassComponent::AtomHigh:
            return std_normal_mills(-hi / sigma) / sigma;
        case MassComponent::OutOfSupport:
            break;
    }
    throw NondifferentiablePoint("clipped noise outside its support has no gradient");
}

NoiseSpec NoiseSpec::standard(int n) { return gaussian(Vec::Ones(n)); }

NoiseSpec NoiseSpec::gaussian(const Vec& sigma) {
    const auto n = sigma.size();
    return {Vec::Zero(n), sigma, Vec::Constant(n, kNegInf), Vec::Constant(n, kInf)};
}

NoiseMass noise_log_mass(const NoiseSpec& noise, const Vec& nu, double tol) {
    NoiseMass out{0.0, 0};
    for (int i = 0; i < noise.dim(); ++i) {
        const double x = nu[i] - noise.mean[i];
        const bool clipped = std::isfinite(noise.lo[i]) || std::isfinite(noise.hi[i]);
        if (!clipped) {
            out.log_value += normal_logpdf(x, noise.sigma[i]);
            out.continuous_mask |= 1u << i;
            continue;
        }
        const auto m = clipped_gaussian_logmass(noise.sigma[i], x, noise.lo[i] - noise.mean[i],
                                                noise.hi[i] - noise.mean[i], tol);
        out.log_value += m.log_value;
        if (m.component == MassComponent::Continuous) out.continuous_mask |= 1u << i;
    }
    return out;
}

double change_of_variables_logpdf(const NoiseSpec& noise, const Vec& nu, double jac_det_abs) {
    if (!(jac_det_abs > 0.0) || !std::isfinite(jac_det_abs)) {
        throw SingularJacobian("change of variables needs a positive finite |det|");
    }
    return noise_log_mass(noise, nu).log_value - std::log(jac_det_abs);
}

double area_jacobian(const Mat& d) {
    if (d.cols() == 0) return 1.0;
    const Mat gram = d.transpose() * d;
    Eigen::LLT<Mat> llt(gram);
    if (llt.info() != Eigen::Success) throw RankDeficientJacobian("D^T D is not positive definite");
    const Mat l = llt.matrixL();
    double j = 1.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
        if (!(l(i, i) > 0.0)) throw RankDeficientJacobian("D^T D is singular");
        j *= l(i, i);
    }
    return j;
}

double area_formula_logpdf(const NoiseSpec& noise, std::span<const NoiseRoot> roots) {
    std::vector<double> terms;
    terms.reserve(roots.size());
    for (const auto& root : roots) {
        const auto mass = noise_log_mass(noise, root.nu);
        if (mass.log_value == kNegInf) continue;
        Mat cont(root.jacobian.rows(), 0);
        for (int i = 0; i < noise.dim(); ++i) {
            if (mass.continuous_mask & (1u << i)) {
                cont.conservativeResize(Eigen::NoChange, cont.cols() + 1);
                cont.col(cont.cols() - 1) = root.jacobian.col(i);
            }
        }
        terms.push_back(mass.log_value - std::log(area_jacobian(cont)));
    }
    return log_sum_exp(terms);
}

DensityGrad input_noise_density(const ClippedActionNoise& noise, const Action& realized,
                                const Mat& output_jacobian, const Action& a_prime,
                                bool want_grad) {
    const int n = static_cast<int>(a_prime.size());
    NoiseSpec spec{Vec::Zero(n), noise.sigma, noise.lo - a_prime, noise.hi - a_prime};
    const Vec nu = realized - a_prime;
    const NoiseRoot root{nu, output_jacobian};
    DensityGrad out{area_formula_logpdf(spec, std::span<const NoiseRoot>(&root, 1)), Vec::Zero(n)};
    if (!want_grad || out.log_density == kNegInf) return out;
    for (int i = 0; i < n; ++i) {
        const auto m = clipped_gaussian_logmass(noise.sigma[i], nu[i], spec.lo[i], spec.hi[i]);
        out.grad[i] = clipped_gaussian_logmass_shift_grad(noise.sigma[i], nu[i], spec.lo[i],
                                                          spec.hi[i], m.component);
    }
    return out;
}

DensityGrad output_noise_density(const Mat& g, const Vec& f_value, const Mat& f_action_jacobian,
                                 const State& next, bool want_grad, double tol) {
    const Eigen::VectorXd resid = (next - f_value).eval();
    const Mat gram = g.transpose() * g;
    Eigen::LLT<Mat> llt(gram);
    if (llt.info() != Eigen::Success) throw RankDeficientJacobian("output noise map is rank deficient");
    const Eigen::VectorXd nu = llt.solve(g.transpose() * resid);
    const Eigen::VectorXd miss = g * nu - resid;
    DensityGrad out{kNegInf, Vec::Zero(f_action_jacobian.cols())};
    for (Eigen::Index i = 0; i < miss.size(); ++i) {
        if (std::abs(miss[i]) > tol * std::max(1.0, std::abs(next[i]))) return out;
    }
    const Vec nu_small = nu;
    const NoiseRoot root{nu_small, g};
    out.log_density =
        area_formula_logpdf(NoiseSpec::standard(static_cast<int>(nu.size())),
                            std::span<const NoiseRoot>(&root, 1));
    if (want_grad) {
        out.grad = f_action_jacobian.transpose() * (g * llt.solve(nu));
    }
    return out;
}

}  // namespace agmcts
