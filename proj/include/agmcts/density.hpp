#pragma once

#include "agmcts/types.hpp"

#include <cstdint>
#include <span>

namespace agmcts {

// Absolute tolerance for deciding that implied noise sits on a clip boundary.
inline constexpr double kClipTolerance = 1e-9;

double normal_logpdf(double x, double sigma);
double std_normal_log_cdf(double z);  // log Phi(z), accurate deep in the lower tail
double std_normal_log_sf(double z);   // log(1 - Phi(z))
double std_normal_mills(double z);    // phi(z) / Phi(z)

enum class MassComponent { AtomLow, AtomHigh, Continuous, OutOfSupport };

struct ClippedMass {
    double log_value;
    MassComponent component;
};

// Law of clip(nu, L, R) for nu ~ N(0, sigma^2), evaluated at nu: the atom
// masses Phi(L/sigma) and 1 - Phi(R/sigma) at the ends, the Gaussian pdf in
// between, and -inf outside [L - tol, R + tol].
ClippedMass clipped_gaussian_logmass(double sigma, double nu, double lo, double hi,
                                     double tol = kClipTolerance);

// d/dt of the log mass when (nu, L, R) are all shifted by -t, at t = 0.
// This is the derivative with respect to the nominal action when nu = a~ - a.
double clipped_gaussian_logmass_shift_grad(double sigma, double nu, double lo, double hi,
                                           MassComponent component);

// Independent Gaussian noise per coordinate, optionally clipped to [lo, hi]
// (infinite bounds mean no clipping on that coordinate).
struct NoiseSpec {
    Vec mean;
    Vec sigma;
    Vec lo;
    Vec hi;

    static NoiseSpec standard(int n);
    static NoiseSpec gaussian(const Vec& sigma);
    int dim() const { return static_cast<int>(sigma.size()); }
};

struct NoiseMass {
    double log_value;
    std::uint32_t continuous_mask;  // bit i set when coordinate i is in the continuous part
};

NoiseMass noise_log_mass(const NoiseSpec& noise, const Vec& nu, double tol = kClipTolerance);

// log p_nu(nu*) - log |det D f|.
double change_of_variables_logpdf(const NoiseSpec& noise, const Vec& nu, double jac_det_abs);

struct NoiseRoot {
    Vec nu;
    Mat jacobian;  // D_nu f at nu, n_s x n_nu
};

// sqrt(det(D^T D)) through a Cholesky factorization of the Gram matrix.
double area_jacobian(const Mat& d);

// log sum over roots of p_nu(nu*) / J f(nu*). Coordinates that land on a clip
// atom are dropped from the Jacobian (the image is a point along them).
double area_formula_logpdf(const NoiseSpec& noise, std::span<const NoiseRoot> roots);

struct DensityGrad {
    double log_density;
    Vec grad;
};

// Clipped additive action noise: a~ = clip(a + nu, lo, hi), s' = f(s, a~).
struct ClippedActionNoise {
    Vec sigma;
    Vec lo;
    Vec hi;
};

// Density of s' under nominal action a_prime, given the realized a~ that
// produced s' and the cached output sensitivity D_{a~} f (n_s x n_a).
DensityGrad input_noise_density(const ClippedActionNoise& noise, const Action& realized,
                                const Mat& output_jacobian, const Action& a_prime,
                                bool want_grad);

// Additive output noise: s' = f(s, a') + G nu with nu ~ N(0, I).
// `f_value` and `f_action_jacobian` are f and D_{a'} f at (s, a').
DensityGrad output_noise_density(const Mat& g, const Vec& f_value, const Mat& f_action_jacobian,
                                 const State& next, bool want_grad, double tol = kClipTolerance);

}  // namespace agmcts
