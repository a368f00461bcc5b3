#include "agmcts/lse.hpp"

#include <algorithm>
#include <limits>

namespace agmcts {

double log_sum_exp(std::span<const double> xs) {
    double m = -INFINITY;
    for (double x : xs) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

LseAccumulator LseAccumulator::from_log(double log_magnitude, int sign) {
    LseAccumulator acc;
    acc.add(log_magnitude, sign);
    return acc;
}

void LseAccumulator::add(double log_magnitude, int sign, double weight_log) {
    const double l = log_magnitude + weight_log;
    if (sign == 0 || l == -INFINITY) return;
    sign = sign > 0 ? 1 : -1;
    max_input_log_ = std::max(max_input_log_, l);
    if (sign_ == 0) {
        log_mag_ = l;
        sign_ = sign;
        return;
    }
    const double hi = std::max(log_mag_, l);
    const double lo = std::min(log_mag_, l);
    if (sign == sign_) {
        log_mag_ = hi + std::log1p(std::exp(lo - hi));
        return;
    }
    // Opposite signs: the larger magnitude keeps its sign.
    if (hi == lo) {
        log_mag_ = -INFINITY;
        sign_ = 0;
        cancelled_ = true;
        return;
    }
    const int winner = log_mag_ > l ? sign_ : sign;
    log_mag_ = hi + std::log1p(-std::exp(lo - hi));
    sign_ = winner;
    if (log_mag_ < max_input_log_ + std::log(kCancellationRatio)) cancelled_ = true;
}

void LseAccumulator::add_value(double x) {
    if (x == 0.0) return;
    add(std::log(std::abs(x)), x > 0 ? 1 : -1);
}

double LseAccumulator::value() const {
    if (sign_ == 0) return 0.0;
    return sign_ * std::exp(log_mag_);
}

}  // namespace agmcts
