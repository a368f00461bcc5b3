#pragma once

#include <cmath>
#include <span>

namespace agmcts {

// log(sum_i exp(x_i)); -inf for an empty input.
double log_sum_exp(std::span<const double> xs);

// Signed log-space accumulator: represents sign * exp(log_magnitude).
// Adding terms of opposite sign is exact up to rounding; a result that is
// tiny relative to the largest term seen is flagged as a cancellation.
class LseAccumulator {
public:
    static constexpr double kCancellationRatio = 1e-12;

    LseAccumulator() = default;
    static LseAccumulator from_log(double log_magnitude, int sign = 1);

    // Adds sign * exp(log_magnitude + weight_log).
    void add(double log_magnitude, int sign = 1, double weight_log = 0.0);
    void add_value(double x);

    double log_magnitude() const { return log_mag_; }
    int sign() const { return sign_; }
    double value() const;
    bool cancelled() const { return cancelled_; }
    double max_input_log() const { return max_input_log_; }
    void clear_flag() { cancelled_ = false; }

private:
    double log_mag_ = -INFINITY;
    int sign_ = 0;
    bool cancelled_ = false;
    double max_input_log_ = -INFINITY;
};

}  // namespace agmcts
