#pragma once

#include "agmcts/types.hpp"

#include <array>
#include <cmath>
#include <cstddef>

namespace agmcts {

// Forward-mode dual number carrying N directional derivatives.
template <int N>
struct Dual {
    double v = 0.0;
    std::array<double, N> d{};

    Dual() = default;
    Dual(double value) : v(value) {}  // NOLINT: implicit lift of constants

    static Dual variable(double value, int direction) {
        Dual x(value);
        x.d[direction] = 1.0;
        return x;
    }

    Dual& operator+=(const Dual& o) {
        v += o.v;
        for (int i = 0; i < N; ++i) d[i] += o.d[i];
        return *this;
    }
    Dual& operator-=(const Dual& o) {
        v -= o.v;
        for (int i = 0; i < N; ++i) d[i] -= o.d[i];
        return *this;
    }
    Dual& operator*=(const Dual& o) {
        for (int i = 0; i < N; ++i) d[i] = d[i] * o.v + v * o.d[i];
        v *= o.v;
        return *this;
    }
    Dual& operator/=(const Dual& o) {
        const double inv = 1.0 / o.v;
        for (int i = 0; i < N; ++i) d[i] = (d[i] - v * inv * o.d[i]) * inv;
        v *= inv;
        return *this;
    }
};

template <int N>
Dual<N> operator+(Dual<N> a, const Dual<N>& b) { return a += b; }
template <int N>
Dual<N> operator-(Dual<N> a, const Dual<N>& b) { return a -= b; }
template <int N>
Dual<N> operator*(Dual<N> a, const Dual<N>& b) { return a *= b; }
template <int N>
Dual<N> operator/(Dual<N> a, const Dual<N>& b) { return a /= b; }

template <int N>
Dual<N> operator+(Dual<N> a, double b) { a.v += b; return a; }
template <int N>
Dual<N> operator+(double b, Dual<N> a) { a.v += b; return a; }
template <int N>
Dual<N> operator-(Dual<N> a, double b) { a.v -= b; return a; }
template <int N>
Dual<N> operator-(double b, const Dual<N>& a) { return Dual<N>(b) - a; }
template <int N>
Dual<N> operator*(Dual<N> a, double b) {
    a.v *= b;
    for (auto& x : a.d) x *= b;
    return a;
}
template <int N>
Dual<N> operator*(double b, Dual<N> a) { return a * b; }
template <int N>
Dual<N> operator/(Dual<N> a, double b) { return a * (1.0 / b); }
template <int N>
Dual<N> operator/(double b, const Dual<N>& a) { return Dual<N>(b) / a; }
template <int N>
Dual<N> operator-(Dual<N> a) { return a * -1.0; }

template <int N>
bool operator<(const Dual<N>& a, double b) { return a.v < b; }
template <int N>
bool operator>(const Dual<N>& a, double b) { return a.v > b; }

namespace detail {
template <int N>
Dual<N> chain(const Dual<N>& a, double value, double deriv) {
    Dual<N> r(value);
    for (int i = 0; i < N; ++i) r.d[i] = deriv * a.d[i];
    return r;
}
}  // namespace detail

template <int N>
Dual<N> sin(const Dual<N>& a) { return detail::chain(a, std::sin(a.v), std::cos(a.v)); }
template <int N>
Dual<N> cos(const Dual<N>& a) { return detail::chain(a, std::cos(a.v), -std::sin(a.v)); }
template <int N>
Dual<N> exp(const Dual<N>& a) {
    const double e = std::exp(a.v);
    return detail::chain(a, e, e);
}
template <int N>
Dual<N> log(const Dual<N>& a) { return detail::chain(a, std::log(a.v), 1.0 / a.v); }
template <int N>
Dual<N> sqrt(const Dual<N>& a) {
    const double s = std::sqrt(a.v);
    return detail::chain(a, s, 0.5 / s);
}
template <int N>
Dual<N> pow(const Dual<N>& a, double p) {
    return detail::chain(a, std::pow(a.v, p), p * std::pow(a.v, p - 1.0));
}

inline double value_of(double x) { return x; }
template <int N>
double value_of(const Dual<N>& x) { return x.v; }

// Jacobian of f at x. `f` maps std::array<Dual<N>, N> to any indexable
// container of Dual<N> (size() and operator[]).
template <int N, class F>
Mat dual_forward_jacobian(F&& f, const Vec& x) {
    std::array<Dual<N>, N> in;
    for (int i = 0; i < N; ++i) in[i] = Dual<N>::variable(x[i], i);
    const auto out = f(in);
    const auto m = static_cast<Eigen::Index>(out.size());
    Mat jac(m, N);
    for (Eigen::Index r = 0; r < m; ++r) {
        for (int c = 0; c < N; ++c) jac(r, c) = out[static_cast<std::size_t>(r)].d[c];
    }
    return jac;
}

}  // namespace agmcts
