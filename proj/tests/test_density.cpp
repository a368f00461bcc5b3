#include "agmcts/density.hpp"
#include "agmcts/dual.hpp"

#include <Eigen/LU>
#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

using namespace agmcts;

namespace {
const double kLogRoot2Pi = 0.5 * std::log(2.0 * M_PI);
}

TEST_CASE("change of variables") {
    const NoiseSpec n = NoiseSpec::standard(1);
    const Vec zero = Vec::Zero(1);
    CHECK(change_of_variables_logpdf(n, zero, 1.0) == doctest::Approx(-0.9189385332).epsilon(1e-10));
    CHECK(change_of_variables_logpdf(n, zero, 2.0) ==
          doctest::Approx(-kLogRoot2Pi - std::log(2.0)).epsilon(1e-14));
    CHECK_THROWS_AS(change_of_variables_logpdf(n, zero, 0.0), SingularJacobian);
    CHECK_THROWS_AS(change_of_variables_logpdf(n, zero, NAN), SingularJacobian);
}

TEST_CASE("area formula") {
    const NoiseSpec n = NoiseSpec::standard(1);
    Mat d(2, 1);
    d << 2.0, 0.0;
    std::vector<NoiseRoot> roots{{Vec::Zero(1), d}};
    CHECK(area_formula_logpdf(n, roots) == doctest::Approx(std::log(0.3989422804014327 / 2.0)));
    CHECK(area_formula_logpdf(n, std::vector<NoiseRoot>{}) == -INFINITY);

    // Bijective square map: agrees with change of variables.
    const NoiseSpec n2 = NoiseSpec::standard(2);
    Mat m(2, 2);
    m << 1.5, 0.3, -0.2, 0.7;
    Vec nu(2);
    nu << 0.4, -1.1;
    std::vector<NoiseRoot> sq{{nu, m}};
    CHECK(std::abs(area_formula_logpdf(n2, sq) -
                   change_of_variables_logpdf(n2, nu, std::abs(m.determinant()))) < 1e-12);

    // Two roots add.
    std::vector<NoiseRoot> twice{{Vec::Zero(1), d}, {Vec::Zero(1), d}};
    CHECK(area_formula_logpdf(n, twice) ==
          doctest::Approx(std::log(2.0 * 0.3989422804014327 / 2.0)));

    Mat rank0 = Mat::Zero(2, 1);
    std::vector<NoiseRoot> bad{{Vec::Zero(1), rank0}};
    CHECK_THROWS_AS(area_formula_logpdf(n, bad), RankDeficientJacobian);
    CHECK(area_jacobian(d) == doctest::Approx(2.0));
}

TEST_CASE("clipped gaussian mixture") {
    const auto atom = clipped_gaussian_logmass(0.1, -0.5, -0.5, 0.5);
    CHECK(atom.component == MassComponent::AtomLow);
    CHECK(atom.log_value == doctest::Approx(std::log(2.866515718791939e-7)).epsilon(1e-10));
    const auto hi = clipped_gaussian_logmass(0.1, 0.5, -0.5, 0.5);
    CHECK(hi.component == MassComponent::AtomHigh);
    CHECK(hi.log_value == doctest::Approx(atom.log_value).epsilon(1e-12));
    const auto mid = clipped_gaussian_logmass(0.1, 0.0, -0.5, 0.5);
    CHECK(mid.component == MassComponent::Continuous);
    CHECK(mid.log_value == doctest::Approx(std::log(3.989422804014327)).epsilon(1e-12));
    const auto out = clipped_gaussian_logmass(0.1, 0.5 + 10 * kClipTolerance, -0.5, 0.5);
    CHECK(out.component == MassComponent::OutOfSupport);
    CHECK(out.log_value == -INFINITY);
    // Within tolerance of the boundary still counts as the atom.
    CHECK(clipped_gaussian_logmass(0.1, -0.5 + 0.5 * kClipTolerance, -0.5, 0.5).component ==
          MassComponent::AtomLow);
}

TEST_CASE("normal tails") {
    CHECK(std_normal_log_cdf(-5.0) == doctest::Approx(std::log(2.866515718791939e-7)).epsilon(1e-12));
    CHECK(std::isfinite(std_normal_log_cdf(-40.0)));
    CHECK(std_normal_log_cdf(-40.0) < -800.0);
    CHECK(std_normal_log_sf(5.0) == doctest::Approx(std_normal_log_cdf(-5.0)));
    CHECK(normal_logpdf(0.0, 1.0) == doctest::Approx(-kLogRoot2Pi));
}

TEST_CASE("input noise density for a Mountain Car style column") {
    ClippedActionNoise noise{Vec::Constant(1, 0.1), Vec::Constant(1, -1.0), Vec::Constant(1, 1.0)};
    Mat jac(2, 1);
    jac << 0.001, 0.001;
    const Action realized = Vec::Constant(1, 0.3);
    const Action a = Vec::Constant(1, 0.25);
    const auto d = input_noise_density(noise, realized, jac, a, true);
    const double expect = clipped_gaussian_logmass(0.1, 0.05, -1.0 - 0.25, 1.0 - 0.25).log_value -
                          std::log(0.001 * std::sqrt(2.0));
    CHECK(d.log_density == doctest::Approx(expect).epsilon(1e-13));
    // Score of a Gaussian in its mean: nu / sigma^2.
    CHECK(d.grad[0] == doctest::Approx(0.05 / 0.01).epsilon(1e-12));

    const double h = 1e-6;
    const auto up = input_noise_density(noise, realized, jac, Vec::Constant(1, 0.25 + h), false);
    const auto dn = input_noise_density(noise, realized, jac, Vec::Constant(1, 0.25 - h), false);
    CHECK(std::abs((up.log_density - dn.log_density) / (2 * h) - d.grad[0]) / std::abs(d.grad[0]) < 1e-5);

    // Saturated realized action: the upper atom, a point mass with no area element.
    const auto sat = input_noise_density(noise, Vec::Constant(1, 1.0), jac, a, false);
    CHECK(sat.log_density == doctest::Approx(std_normal_log_sf(0.75 / 0.1)).epsilon(1e-12));
}

TEST_CASE("output noise density") {
    Mat g = Mat::Zero(2, 1);
    g(0, 0) = 2.0;
    Vec f(2);
    f << 1.0, 3.0;
    Mat fa(2, 1);
    fa << 1.0, 0.0;
    State next(2);
    next << 1.0, 3.0;
    const auto d = output_noise_density(g, f, fa, next, true);
    CHECK(d.log_density == doctest::Approx(std::log(0.3989422804014327 / 2.0)));
    CHECK(d.grad[0] == doctest::Approx(0.0).epsilon(1e-15));
    next[1] = 3.5;  // off the image of g
    CHECK(output_noise_density(g, f, fa, next, false).log_density == -INFINITY);
}

TEST_CASE("dual forward jacobian") {
    Vec x(2);
    x << 3.0, 2.0;
    const Mat id = dual_forward_jacobian<2>([](const auto& v) { return v; }, x);
    CHECK((id - Mat::Identity(2, 2)).norm() == 0.0);
    const Mat j = dual_forward_jacobian<2>(
        [](const auto& v) { return std::array{v[0] * v[0], v[0] * v[1]}; }, x);
    Mat expect(2, 2);
    expect << 6, 0, 2, 3;
    CHECK((j - expect).norm() == 0.0);

    const Vec y = Vec::Constant(2, 0.7);
    auto f = [](const auto& v) {
        using std::sin;
        using std::exp;
        return std::array{sin(v[0]) * exp(v[1]), v[0] * v[0] * v[0] / (1.0 + v[1] * v[1])};
    };
    const Mat jd = dual_forward_jacobian<2>(f, y);
    for (int c = 0; c < 2; ++c) {
        std::array<double, 2> p{y[0], y[1]}, m{y[0], y[1]};
        p[c] += 1e-6;
        m[c] -= 1e-6;
        const auto fp = f(p);
        const auto fm = f(m);
        for (int r = 0; r < 2; ++r) {
            const double fd = (fp[r] - fm[r]) / 2e-6;
            CHECK(std::abs(fd - jd(r, c)) / std::abs(jd(r, c)) < 1e-7);
        }
    }
}
