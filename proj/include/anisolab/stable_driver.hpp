#pragma once

// One-dimensional symmetric stable drivers: Levy-measure constants, exact
// increments, and the big-jump / small-jump split used by the path engine.

#include "anisolab/core.hpp"
#include "anisolab/random.hpp"
#include "anisolab/special.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace anisolab {

/// Indices closer than this to 0 or 2 are rejected; the CMS transform degenerates there.
inline constexpr double stability_margin = 1e-3;

/// The stability indices (alpha_1, ..., alpha_d) of the independent drivers.
class StableIndexSet {
public:
    StableIndexSet() = default;

    explicit StableIndexSet(std::vector<double> alphas) : alphas_(std::move(alphas)) {
        require_config(alphas_.size() >= 2, "at least two stability indices are required (d >= 2)");
        for (std::size_t i = 0; i < alphas_.size(); ++i) {
            const double a = alphas_[i];
            require_config(a > 0.0 && a < 2.0, "alpha_" + std::to_string(i + 1) + " = " +
                                                   std::to_string(a) +
                                                   " is outside the open interval (0,2)");
            require_config(a >= stability_margin && a <= 2.0 - stability_margin,
                           "alpha_" + std::to_string(i + 1) +
                               " is within 1e-3 of the interval end points");
        }
        alpha_min_ = *std::min_element(alphas_.begin(), alphas_.end());
        alpha_max_ = *std::max_element(alphas_.begin(), alphas_.end());
    }

    StableIndexSet(std::initializer_list<double> alphas)
        : StableIndexSet(std::vector<double>(alphas)) {}

    [[nodiscard]] std::size_t dimension() const noexcept { return alphas_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return alphas_[i]; }
    [[nodiscard]] double alpha_min() const noexcept { return alpha_min_; }
    [[nodiscard]] double alpha_max() const noexcept { return alpha_max_; }
    [[nodiscard]] std::span<const double> alphas() const noexcept { return alphas_; }

    /// r^(alpha_max/alpha_min): length scale for Holder fits, closeness radii and tube widths.
    [[nodiscard]] double regularity_scale(double r) const {
        return std::pow(r, alpha_max_ / alpha_min_);
    }

private:
    std::vector<double> alphas_;
    double alpha_min_ = 0.0;
    double alpha_max_ = 0.0;
};

/// Constant c such that nu(dh) = c |h|^(-1-gamma) dh is the Levy measure of the process
/// with E exp(i xi Y_t) = exp(-t |xi|^gamma).
///
/// Evaluated as 2^gamma Gamma((1+gamma)/2) / (sqrt(pi) |Gamma(-gamma/2)|), which equals
/// Gamma(1+gamma) sin(pi gamma / 2) / pi; at gamma = 1 it is 1/pi.
[[nodiscard]] inline double levy_constant(double gamma) {
    if (!(gamma > 0.0 && gamma < 2.0))
        throw std::domain_error("levy_constant: gamma must lie in (0,2), got " +
                                std::to_string(gamma));
    return std::pow(2.0, gamma) * gamma_function(0.5 * (1.0 + gamma)) /
           (std::sqrt(std::numbers::pi) * std::abs(gamma_function(-0.5 * gamma)));
}

/// nu({|h| > threshold}) = 2 c threshold^(-gamma) / gamma: the big-jump rate.
[[nodiscard]] inline double big_jump_rate(double gamma, double threshold) {
    return 2.0 * levy_constant(gamma) * std::pow(threshold, -gamma) / gamma;
}

/// Integral of h^2 over nu restricted to |h| <= threshold: the small-component
/// quadratic-variation rate 2 c threshold^(2-gamma) / (2-gamma).
[[nodiscard]] inline double small_jump_variance_rate(double gamma, double threshold) {
    return 2.0 * levy_constant(gamma) * std::pow(threshold, 2.0 - gamma) / (2.0 - gamma);
}

/// Exact draw of Y_dt via the Chambers-Mallows-Stuck transform (symmetric case).
[[nodiscard]] inline double sample_stable_increment(double gamma, double dt, Stream& rng) {
    using std::numbers::pi;
    const double v = pi * (rng.uniform_open() - 0.5);
    const double w = rng.exponential();
    double y;
    if (gamma == 1.0) {
        y = std::tan(v);
    } else {
        y = std::sin(gamma * v) / std::pow(std::cos(v), 1.0 / gamma) *
            std::pow(std::cos((1.0 - gamma) * v) / w, (1.0 - gamma) / gamma);
    }
    return std::pow(dt, 1.0 / gamma) * y;
}

/// A driver Z split at a jump-size threshold into a compound Poisson part (|h| > threshold)
/// and a small part with the matching quadratic-variation rate.
///
/// The small part is drawn as a centred Gaussian with variance
/// small_jump_variance_rate * dt; the Levy measure is symmetric, so no drift compensator
/// appears.
class TruncatedDriver {
public:
    TruncatedDriver(double gamma, double threshold)
        : gamma_(gamma),
          threshold_(threshold),
          rate_(big_jump_rate(gamma, threshold)),
          small_sigma_(std::sqrt(small_jump_variance_rate(gamma, threshold))) {}

    [[nodiscard]] double gamma() const noexcept { return gamma_; }
    [[nodiscard]] double threshold() const noexcept { return threshold_; }
    [[nodiscard]] double rate() const noexcept { return rate_; }
    [[nodiscard]] double small_sigma() const noexcept { return small_sigma_; }

    /// Waiting time to the next big jump.
    double next_arrival(Stream& rng) const { return rng.exponential() / rate_; }

    /// Signed size with density proportional to |h|^(-1-gamma) on |h| > threshold.
    double big_jump_size(Stream& rng) const {
        return rng.sign() * threshold_ * std::pow(rng.uniform_open(), -1.0 / gamma_);
    }

    double small_increment(double dt, Stream& rng) const {
        return small_sigma_ * std::sqrt(dt) * rng.normal();
    }

private:
    double gamma_;
    double threshold_;
    double rate_;
    double small_sigma_;
};

struct BigJump {
    double time;
    double size;
};

struct JumpDecomposition {
    double threshold = 0.0;
    double horizon = 0.0;
    double grid_step = 0.0;
    std::vector<BigJump> big_jumps;       // strictly increasing times, |size| > threshold
    std::vector<double> small_increments; // one per grid step; last step may be shorter

    [[nodiscard]] double big_total() const {
        double s = 0.0;
        for (const auto& j : big_jumps) s += j.size;
        return s;
    }
    [[nodiscard]] double small_total() const {
        double s = 0.0;
        for (double v : small_increments) s += v;
        return s;
    }
    [[nodiscard]] double small_quadratic_variation() const {
        double s = 0.0;
        for (double v : small_increments) s += v * v;
        return s;
    }
};

inline constexpr double default_max_threshold = 1e12;

/// Splits one driver path on [0, horizon] into big jumps and per-step small increments.
/// Draw order (jumps first, then small increments) is fixed so the result is a pure
/// function of the stream state.
[[nodiscard]] inline JumpDecomposition decompose_jumps(double gamma, double threshold,
                                                       double horizon, double grid_step,
                                                       Stream& rng,
                                                       double max_threshold = default_max_threshold) {
    require_config(gamma > 0.0 && gamma < 2.0, "gamma must lie in (0,2)");
    require_config(threshold > 0.0, "jump threshold must be positive");
    require_config(threshold < max_threshold, "jump threshold exceeds the configured maximum");
    require_config(grid_step > 0.0, "grid step must be positive");
    require_config(grid_step <= horizon, "grid step must not exceed the horizon");

    const TruncatedDriver driver(gamma, threshold);
    JumpDecomposition out;
    out.threshold = threshold;
    out.horizon = horizon;
    out.grid_step = grid_step;

    for (double t = driver.next_arrival(rng); t <= horizon; t += driver.next_arrival(rng))
        out.big_jumps.push_back({t, driver.big_jump_size(rng)});

    const auto steps = static_cast<std::size_t>(std::ceil(horizon / grid_step - 1e-12));
    out.small_increments.reserve(steps);
    for (std::size_t i = 0; i < steps; ++i) {
        const double t0 = static_cast<double>(i) * grid_step;
        const double dt = std::min(grid_step, horizon - t0);
        out.small_increments.push_back(driver.small_increment(dt, rng));
    }
    return out;
}

} // namespace anisolab
