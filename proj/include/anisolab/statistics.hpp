#pragma once

#include "anisolab/core.hpp"

#include <boost/math/distributions/beta.hpp>

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace anisolab {

inline constexpr double z95 = 1.959963984540054;

/// Monte Carlo estimate with its uncertainty and provenance.
struct EstimateReport {
    double estimate = 0.0;
    double std_error = 0.0;
    double ci95_lo = 0.0;
    double ci95_hi = 0.0;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
    double wall_time = 0.0;
    double censored_fraction = 0.0;
};

/// Sample mean with a normal 95% interval. Summation runs in index order.
[[nodiscard]] inline EstimateReport mean_report(std::span<const double> samples) {
    EstimateReport r;
    r.n_samples = samples.size();
    if (samples.empty()) return r;
    double sum = 0.0;
    for (double s : samples) sum += s;
    const double mean = sum / static_cast<double>(samples.size());
    double ss = 0.0;
    for (double s : samples) ss += (s - mean) * (s - mean);
    const double n = static_cast<double>(samples.size());
    const double var = samples.size() > 1 ? ss / (n - 1.0) : 0.0;
    r.estimate = mean;
    r.std_error = std::sqrt(var / n);
    r.ci95_lo = mean - z95 * r.std_error;
    r.ci95_hi = mean + z95 * r.std_error;
    return r;
}

/// Exact binomial (Clopper-Pearson) interval.
[[nodiscard]] inline std::pair<double, double> clopper_pearson(std::size_t successes, std::size_t n,
                                                               double level = 0.95) {
    using boost::math::beta_distribution;
    using boost::math::quantile;
    const double tail = 0.5 * (1.0 - level);
    const double x = static_cast<double>(successes);
    const double m = static_cast<double>(n);
    const double lo = successes == 0 ? 0.0 : quantile(beta_distribution<>(x, m - x + 1.0), tail);
    const double hi = successes == n ? 1.0 : quantile(beta_distribution<>(x + 1.0, m - x), 1.0 - tail);
    return {lo, hi};
}

[[nodiscard]] inline EstimateReport proportion_report(std::size_t successes, std::size_t n) {
    EstimateReport r;
    r.n_samples = n;
    if (n == 0) return r;
    const double p = static_cast<double>(successes) / static_cast<double>(n);
    r.estimate = p;
    r.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    std::tie(r.ci95_lo, r.ci95_hi) = clopper_pearson(successes, n);
    return r;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double residual_rms = 0.0;
    std::size_t points = 0;
};

/// Weighted least squares y ~ a + b x. With unit weights the slope error comes from the
/// residual variance; otherwise weights are taken as inverse variances.
[[nodiscard]] inline LineFit fit_line(std::span<const double> x, std::span<const double> y,
                                      std::span<const double> weights = {}) {
    require_config(x.size() == y.size(), "fit_line: size mismatch");
    require_config(x.size() >= 2, "fit_line: need at least two points");
    const bool weighted = !weights.empty();
    double sw = 0, sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double w = weighted ? weights[i] : 1.0;
        sw += w;
        sx += w * x[i];
        sy += w * y[i];
    }
    const double mx = sx / sw, my = sy / sw;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double w = weighted ? weights[i] : 1.0;
        sxx += w * (x[i] - mx) * (x[i] - mx);
        sxy += w * (x[i] - mx) * (y[i] - my);
    }
    require_config(sxx > 0.0, "fit_line: abscissae are all equal");
    LineFit fit;
    fit.points = x.size();
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0, wrss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double res = y[i] - fit.intercept - fit.slope * x[i];
        rss += res * res;
        wrss += (weighted ? weights[i] : 1.0) * res * res;
    }
    fit.residual_rms = std::sqrt(rss / static_cast<double>(x.size()));
    if (weighted) {
        fit.slope_se = std::sqrt(1.0 / sxx);
    } else {
        const double dof = static_cast<double>(x.size()) - 2.0;
        fit.slope_se = dof > 0 ? std::sqrt(wrss / dof / sxx) : 0.0;
    }
    return fit;
}

} // namespace anisolab
