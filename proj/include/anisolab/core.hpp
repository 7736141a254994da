#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace anisolab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Invalid parameters detected before any work is done.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A simulation visited a point where the coefficient matrix is singular.
class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An estimator could not produce a trustworthy number (e.g. persistent censoring).
class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Adaptive quadrature ran out of refinements; carries the best estimate reached.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double estimate, double error_estimate)
        : std::runtime_error(what), estimate_(estimate), error_estimate_(error_estimate) {}

    [[nodiscard]] double estimate() const noexcept { return estimate_; }
    [[nodiscard]] double error_estimate() const noexcept { return error_estimate_; }

private:
    double estimate_;
    double error_estimate_;
};

inline void require_config(bool condition, const std::string& message) {
    if (!condition) throw ConfigError(message);
}

} // namespace anisolab
