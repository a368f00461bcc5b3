#pragma once

#include <Eigen/Core>

#include <limits>
#include <stdexcept>
#include <string>

namespace agmcts {

// State, action and observation vectors live inline (no heap) up to this size.
inline constexpr int kMaxDim = 8;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Mat = Eigen::MatrixXd;

using State = Vec;
using Action = Vec;
using Observation = Vec;

// Simulator side information recorded at sampling time (e.g. the realized
// perturbed action and its output sensitivity). Empty for most domains.
using TransitionCache = Vec;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnsupportedDensity : public Error {
public:
    using Error::Error;
};

class UnsupportedGradient : public Error {
public:
    using Error::Error;
};

class NondifferentiablePoint : public Error {
public:
    using Error::Error;
};

class NotAPomdp : public Error {
public:
    using Error::Error;
};

class SingularJacobian : public Error {
public:
    using Error::Error;
};

class RankDeficientJacobian : public Error {
public:
    using Error::Error;
};

class IntegrationBlowup : public Error {
public:
    using Error::Error;
};

class DegenerateBelief : public Error {
public:
    using Error::Error;
};

class TreeError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

inline Vec zeros(int n) { return Vec::Zero(n); }

}  // namespace agmcts
