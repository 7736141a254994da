#pragma once

// Experiment layer: Monte Carlo estimators for exit times, big-jump exits, support and
// hitting probabilities, harmonic functions and their regularity.
//
// Every estimator is a pure function of its arguments. Path i of an ensemble draws from
// Stream(seed', i), where seed' is the experiment seed or a tag-derived child of it, and
// results are reduced in index order, so the worker count never changes a number.

#include "anisolab/coefficients.hpp"
#include "anisolab/geometry.hpp"
#include "anisolab/parallel.hpp"
#include "anisolab/random.hpp"
#include "anisolab/sde_engine.hpp"
#include "anisolab/stable_driver.hpp"
#include "anisolab/statistics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace anisolab {

/// What every ensemble needs besides its geometry.
struct EnsembleSpec {
    std::shared_ptr<const CoefficientField> field;
    StableIndexSet indices;
    std::size_t n_paths = 10000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::optional<SimulationConfig> simulation;  // scaled to the relevant box when absent
    double max_censored_fraction = 0.01;
    int censoring_retries = 1;       // each retry multiplies the horizon by horizon_growth
    double horizon_growth = 4.0;

    void validate() const {
        require_config(field != nullptr, "missing coefficient field");
        require_config(field->dimension() == static_cast<Eigen::Index>(indices.dimension()),
                       "coefficient field and stability indices differ in dimension");
        require_config(n_paths >= 2, "at least two paths are required");
        if (simulation) simulation->validate();
    }

    [[nodiscard]] SimulationConfig simulation_for(const AnisotropicBox& box) const {
        return simulation ? *simulation : default_config_for(box, indices);
    }
};

namespace detail {

class Stopwatch {
public:
    [[nodiscard]] double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline void stamp(EstimateReport& r, std::uint64_t seed, double wall_time, double censored = 0.0) {
    r.seed = seed;
    r.wall_time = wall_time;
    r.censored_fraction = censored;
}

/// Runs `n` exit simulations, widening the horizon while more than the allowed fraction
/// stays undecided. Throws EstimationError once the retries are spent.
template <class Run, class Undecided>
std::vector<ExitRecord> exit_ensemble(std::size_t n, const EnsembleSpec& spec, SimulationConfig cfg,
                                      Run&& run, Undecided&& undecided, double& censored_fraction,
                                      const std::string& context) {
    for (int attempt = 0;; ++attempt) {
        auto records = parallel_map(n, spec.threads, [&](std::size_t i) { return run(i, cfg); });
        const auto open = std::count_if(records.begin(), records.end(), undecided);
        censored_fraction = static_cast<double>(open) / static_cast<double>(n);
        if (censored_fraction <= spec.max_censored_fraction) return records;
        if (attempt >= spec.censoring_retries)
            throw EstimationError(context + ": " + std::to_string(censored_fraction * 100.0) +
                                  "% of paths censored at horizon " + std::to_string(cfg.horizon));
        cfg.horizon *= spec.horizon_growth;
    }
}

inline std::vector<ExitRecord> box_exits(const Vec& x0, const AnisotropicBox& box, const EnsembleSpec& spec,
                                         std::uint64_t seed, std::size_t n, double& censored_fraction,
                                         const std::string& context) {
    auto run = [&](std::size_t i, const SimulationConfig& cfg) {
        Stream rng(seed, i);
        return first_exit(x0, *spec.field, spec.indices, box, cfg, rng);
    };
    return exit_ensemble(n, spec, spec.simulation_for(box), run,
                         [](const ExitRecord& r) { return r.censored; }, censored_fraction, context);
}

} // namespace detail

struct ScanPoint {
    double parameter;
    EstimateReport report;
};

/// Per-parameter estimates plus a log-log power-law fit.
struct ScalingScan {
    std::vector<ScanPoint> points;
    LineFit fit;
    EstimateReport slope;  // estimate = fitted slope, normal CI from its standard error
    std::vector<std::string> flags;
};

namespace detail {
inline EstimateReport slope_report(const LineFit& fit, std::uint64_t seed, double wall_time) {
    EstimateReport r;
    r.estimate = fit.slope;
    r.std_error = fit.slope_se;
    r.ci95_lo = fit.slope - z95 * fit.slope_se;
    r.ci95_hi = fit.slope + z95 * fit.slope_se;
    r.n_samples = fit.points;
    stamp(r, seed, wall_time);
    return r;
}
} // namespace detail

/// Mean exit time from M_r(center) for each r, and the weighted slope of log E[tau]
/// against log r. Paths start at the box centre unless `start` is given.
[[nodiscard]] inline ScalingScan estimate_exit_time(const Vec& center, std::span<const double> r_list,
                                                    const EnsembleSpec& spec,
                                                    const std::optional<Vec>& start = std::nullopt) {
    spec.validate();
    require_config(!r_list.empty(), "r_list must not be empty");
    ScalingScan scan;
    const detail::Stopwatch total;
    std::vector<double> log_r, log_tau, weights;
    for (std::size_t k = 0; k < r_list.size(); ++k) {
        const double r = r_list[k];
        const AnisotropicBox box(center, r, 1.0, spec.indices);
        const detail::Stopwatch clock;
        double censored = 0.0;
        const auto records = detail::box_exits(start.value_or(center), box, spec, derive_seed(spec.seed, k),
                                               spec.n_paths, censored, "exit time at r = " + std::to_string(r));
        std::vector<double> times(records.size());
        std::transform(records.begin(), records.end(), times.begin(),
                       [](const ExitRecord& rec) { return rec.exit_time; });
        auto report = mean_report(times);
        detail::stamp(report, spec.seed, clock.seconds(), censored);
        scan.points.push_back({r, report});
        if (report.estimate > 0.0 && report.std_error > 0.0) {
            log_r.push_back(std::log(r));
            log_tau.push_back(std::log(report.estimate));
            const double rel = report.std_error / report.estimate;
            weights.push_back(1.0 / (rel * rel));
        }
    }
    if (log_r.size() >= 2) {
        scan.fit = fit_line(log_r, log_tau, weights);
        scan.slope = detail::slope_report(scan.fit, spec.seed, total.seconds());
    } else {
        scan.flags.emplace_back("too few positive exit times for a slope fit");
    }
    return scan;
}

inline constexpr std::size_t min_tail_events = 50;

/// Probability that the exit position from M_r(center) lies outside M_R(center), for each
/// R in R_list (one shared exit ensemble), and the slope of log p against log R.
[[nodiscard]] inline ScalingScan estimate_big_jump_exit(const Vec& center, double r,
                                                        std::span<const double> R_list,
                                                        const EnsembleSpec& spec) {
    spec.validate();
    require_config(!R_list.empty(), "R_list must not be empty");
    for (double R : R_list)
        require_config(R >= 2.0 * r, "R = " + std::to_string(R) + " violates R >= 2r (r = " +
                                         std::to_string(r) + ")");
    const AnisotropicBox box(center, r, 1.0, spec.indices);
    const detail::Stopwatch clock;
    double censored = 0.0;
    const auto records =
        detail::box_exits(center, box, spec, spec.seed, spec.n_paths, censored, "big-jump exit");

    ScalingScan scan;
    std::vector<double> log_R, log_p, weights;
    std::size_t last_count = 0;
    for (double R : R_list) {
        const AnisotropicBox outer(center, R, 1.0, spec.indices);
        const auto hits = static_cast<std::size_t>(std::count_if(
            records.begin(), records.end(),
            [&](const ExitRecord& rec) { return !rec.censored && !outer.contains(rec.exit_state); }));
        auto report = proportion_report(hits, records.size());
        detail::stamp(report, spec.seed, clock.seconds(), censored);
        scan.points.push_back({R, report});
        if (hits > 0 && hits < records.size()) {
            const double p = report.estimate;
            log_R.push_back(std::log(R));
            log_p.push_back(std::log(p));
            weights.push_back(static_cast<double>(records.size()) * p / (1.0 - p));
        }
        last_count = hits;
    }
    const auto largest = std::max_element(R_list.begin(), R_list.end()) - R_list.begin();
    if (scan.points[static_cast<std::size_t>(largest)].report.estimate *
            static_cast<double>(records.size()) < static_cast<double>(min_tail_events) ||
        last_count == 0)
        scan.flags.emplace_back("insufficient tail events");
    if (log_R.size() >= 2) {
        scan.fit = fit_line(log_R, log_p, weights);
        scan.slope = detail::slope_report(scan.fit, spec.seed, clock.seconds());
    } else {
        scan.flags.emplace_back("too few nonzero probabilities for a slope fit");
    }
    return scan;
}

/// Parameters of the "jump along a column, then stay close" event.
struct TargetedJump {
    Vec x0;
    Eigen::Index axis = 0;         // driver k (zero-based)
    double jump_length = 0.0;      // signed xi
    double closeness = 0.1;        // gamma
    double t0 = 1.0;
    double r = 1.0;
    std::optional<double> targeting_threshold;  // defaults to |xi| / 2

    void validate(const StableIndexSet& indices) const {
        const double scale = indices.regularity_scale(r);
        require_config(r > 0.0 && r <= 1.0, "r must lie in (0,1]");
        require_config(axis >= 0 && axis < x0.size(), "axis index out of range");
        require_config(closeness > 0.0 && closeness < scale,
                       "closeness gamma must lie in (0, r^(alpha_max/alpha_min)) = (0, " +
                           std::to_string(scale) + ")");
        require_config(std::abs(jump_length) <= scale,
                       "jump length xi must lie in [-r^(alpha_max/alpha_min), r^(alpha_max/alpha_min)]");
        require_config(t0 > 0.0, "t0 must be positive");
        if (jump_length != 0.0) {
            const double theta = threshold();
            require_config(theta > 0.0 && theta < std::abs(jump_length),
                           "targeting threshold must lie in (0, |xi|)");
        }
    }

    [[nodiscard]] double threshold() const { return targeting_threshold.value_or(0.5 * std::abs(jump_length)); }
};

/// Tracks the event: |X_s - x0| < gamma for s < T and |X_s - (x0 + xi v_k)| < gamma for
/// T <= s <= t0, where T is the first jump of driver k larger than the targeting threshold
/// (T = 0 when xi = 0, T = t0 when no such jump occurs).
class TargetedJumpObserver {
public:
    TargetedJumpObserver(const TargetedJump& event, const Vec& target)
        : event_(event), target_(target), after_(event.jump_length == 0.0) {}

    bool on_start(const Vec& x) { return check(x, false); }
    bool on_step(double t, const Vec& x) { return check(x, !(t < event_.t0)); }
    bool on_jump(double, Eigen::Index axis, double h, const Vec& pre, const Vec& post) {
        if (!check(pre, false)) return false;
        if (!after_ && axis == event_.axis && std::abs(h) > event_.threshold()) after_ = true;
        return check(post, false);
    }

    [[nodiscard]] bool success() const noexcept { return !failed_; }

private:
    bool check(const Vec& x, bool at_horizon) {
        const bool ok = (after_ || at_horizon) ? (x - target_).norm() < event_.closeness
                                               : (x - event_.x0).norm() < event_.closeness;
        failed_ = failed_ || !ok;
        return ok;
    }

    const TargetedJump& event_;
    const Vec& target_;
    bool after_;
    bool failed_ = false;
};

[[nodiscard]] inline EstimateReport estimate_targeted_jump(const TargetedJump& event, const EnsembleSpec& spec) {
    spec.validate();
    event.validate(spec.indices);
    const Vec target = event.x0 + event.jump_length * (*spec.field)(event.x0).col(event.axis);
    SimulationConfig cfg = spec.simulation_for(AnisotropicBox(event.x0, event.r, 1.0, spec.indices));
    cfg.horizon = event.t0;
    cfg.grid_step = std::min(cfg.grid_step, event.t0);
    if (event.jump_length != 0.0) cfg.jump_threshold = std::min(cfg.jump_threshold, event.threshold());
    const detail::Stopwatch clock;
    const auto ok = parallel_map(spec.n_paths, spec.threads, [&](std::size_t i) {
        Stream rng(spec.seed, i);
        TargetedJumpObserver obs(event, target);
        simulate(event.x0, *spec.field, spec.indices, cfg, rng, obs);
        return static_cast<unsigned char>(obs.success());
    });
    const auto successes = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1));
    auto report = proportion_report(successes, spec.n_paths);
    detail::stamp(report, spec.seed, clock.seconds());
    return report;
}

/// Piecewise-linear curve through `points` at `times` (times[0] = 0, increasing).
struct Polyline {
    std::vector<double> times;
    std::vector<Vec> points;

    void validate() const {
        require_config(points.size() >= 1 && points.size() == times.size(),
                       "polyline needs matching, nonempty times and points");
        require_config(times.front() == 0.0, "polyline must start at time 0");
        for (std::size_t i = 1; i < times.size(); ++i)
            require_config(times[i] > times[i - 1], "polyline times must be strictly increasing");
    }

    /// Vertices spread evenly over [0, t_end].
    [[nodiscard]] static Polyline uniform(std::vector<Vec> points, double t_end) {
        Polyline p;
        p.points = std::move(points);
        const std::size_t n = p.points.size();
        for (std::size_t i = 0; i < n; ++i)
            p.times.push_back(n == 1 ? 0.0 : t_end * static_cast<double>(i) / static_cast<double>(n - 1));
        return p;
    }

    [[nodiscard]] Vec at(double t) const {
        if (t <= times.front()) return points.front();
        if (t >= times.back()) return points.back();
        const auto it = std::upper_bound(times.begin(), times.end(), t);
        const auto i = static_cast<std::size_t>(it - times.begin());
        const double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
        return (1.0 - w) * points[i - 1] + w * points[i];
    }
};

/// Stays true while every monitored state is within epsilon of the curve at the same time.
class TubeObserver {
public:
    TubeObserver(const Polyline& curve, double epsilon) : curve_(curve), epsilon_(epsilon) {}

    bool on_start(const Vec& x) { return check(0.0, x); }
    bool on_step(double t, const Vec& x) { return check(t, x); }
    bool on_jump(double t, Eigen::Index, double, const Vec& pre, const Vec& post) {
        return check(t, pre) && check(t, post);
    }
    [[nodiscard]] bool success() const noexcept { return !failed_; }

private:
    bool check(double t, const Vec& x) {
        if (!((x - curve_.at(t)).norm() < epsilon_)) failed_ = true;
        return !failed_;
    }

    const Polyline& curve_;
    double epsilon_;
    bool failed_ = false;
};

/// Fraction of paths staying inside the epsilon-tube around the curve on [0, t0],
/// monitored at grid and jump times (an upper-biased proxy for the continuous supremum).
/// The curve must start at x0 and stay in M_r(x0).
[[nodiscard]] inline EstimateReport estimate_tube_probability(const Vec& x0, const Polyline& curve,
                                                              double epsilon, double r,
                                                              const EnsembleSpec& spec) {
    spec.validate();
    curve.validate();
    const AnisotropicBox box(x0, r, 1.0, spec.indices);
    require_config((curve.points.front() - x0).norm() == 0.0, "the curve must start at x0");
    for (const auto& p : curve.points)
        require_config(box.contains(p), "the curve leaves M_r(x0)");
    const double scale = spec.indices.regularity_scale(r);
    require_config(epsilon > 0.0 && epsilon < scale,
                   "epsilon must lie in (0, r^(alpha_max/alpha_min)) = (0, " + std::to_string(scale) + ")");
    SimulationConfig cfg = spec.simulation_for(box);
    cfg.horizon = curve.times.back() > 0.0 ? curve.times.back() : cfg.horizon;
    cfg.grid_step = std::min(cfg.grid_step, cfg.horizon);
    const detail::Stopwatch clock;
    const auto ok = parallel_map(spec.n_paths, spec.threads, [&](std::size_t i) {
        Stream rng(spec.seed, i);
        TubeObserver obs(curve, epsilon);
        simulate(x0, *spec.field, spec.indices, cfg, rng, obs);
        return static_cast<unsigned char>(obs.success());
    });
    const auto successes = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1));
    auto report = proportion_report(successes, spec.n_paths);
    detail::stamp(report, spec.seed, clock.seconds());
    return report;
}

/// P(T_target < tau_M) started from x0 in the half-dilated box.
[[nodiscard]] inline EstimateReport estimate_hitting(const Vec& x0, const BoxUnion& target,
                                                     const AnisotropicBox& enclosing,
                                                     const EnsembleSpec& spec) {
    spec.validate();
    const AnisotropicBox half(enclosing.center(), enclosing.r(), 0.5 * enclosing.k(), spec.indices);
    require_config(half.contains(x0), "x0 must lie in the half-dilated box M^(1/2)");
    require_config(!target.boxes.empty() && target.volume() > 0.0, "target must have positive volume");
    const AxisBox hull = enclosing.closure();
    for (const auto& b : target.boxes) {
        require_same_dimension(b.lo.size(), x0.size());
        for (Eigen::Index i = 0; i < x0.size(); ++i)
            require_config(b.lo[i] >= hull.lo[i] && b.hi[i] <= hull.hi[i],
                           "target must lie inside the enclosing box");
    }
    const detail::Stopwatch clock;
    double censored = 0.0;
    auto run = [&](std::size_t i, const SimulationConfig& cfg) {
        Stream rng(spec.seed, i);
        return first_hit(x0, *spec.field, spec.indices, target, enclosing, cfg, rng);
    };
    const auto records = detail::exit_ensemble(
        spec.n_paths, spec, spec.simulation_for(enclosing), run,
        [](const ExitRecord& r) { return r.censored && !r.hit_time; }, censored, "hitting");
    const auto hits = static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [](const ExitRecord& r) { return r.hit_time.has_value(); }));
    auto report = proportion_report(hits, spec.n_paths);
    detail::stamp(report, spec.seed, clock.seconds(), censored);
    return report;
}

using Payoff = std::function<double(const Vec&)>;

struct PointEstimate {
    Vec x;
    EstimateReport report;
};

/// h(x) = E^x g(X_tau_D) at each grid point, with independent ensembles per point.
/// Paths still inside D at the horizon contribute g at their last state and are counted
/// in censored_fraction.
[[nodiscard]] inline std::vector<PointEstimate> harmonic_evaluate(const Payoff& g, const AnisotropicBox& domain,
                                                                  std::span<const Vec> grid,
                                                                  const EnsembleSpec& spec) {
    spec.validate();
    std::vector<PointEstimate> out;
    out.reserve(grid.size());
    for (std::size_t p = 0; p < grid.size(); ++p) {
        require_config(domain.contains(grid[p]), "harmonic grid point outside the domain");
        const detail::Stopwatch clock;
        double censored = 0.0;
        const auto records = detail::box_exits(grid[p], domain, spec, derive_seed(spec.seed, p), spec.n_paths,
                                               censored, "harmonic evaluation");
        std::vector<double> values(records.size());
        std::transform(records.begin(), records.end(), values.begin(),
                       [&](const ExitRecord& r) { return g(r.exit_state); });
        auto report = mean_report(values);
        detail::stamp(report, spec.seed, clock.seconds(), censored);
        out.push_back({grid[p], report});
    }
    return out;
}

struct HolderFit {
    double beta_hat = 0.0;
    double c_hat = 0.0;
    std::size_t pairs_used = 0;
    double r_scale = 1.0;
    double residual = 0.0;
    double beta_se = 0.0;
    double beta_ci_lo = 0.0;
    double beta_ci_hi = 0.0;
};

struct HolderOptions {
    std::size_t min_pairs = 10;
    std::size_t min_points = 10;
    double separation_se = 3.0;        // pairs must differ by this many combined SEs
    double max_ci_fraction = 0.5;      // every CI width below this fraction of the value spread
    std::optional<double> sup_norm;    // sup |h|; the largest |h| on the grid when absent
};

/// Fits |h(x) - h(y)| = c (|x - y| / r^(alpha_max/alpha_min))^beta sup|h| on the pairs whose
/// difference is resolved by the Monte Carlo error.
[[nodiscard]] inline HolderFit fit_holder_exponent(std::span<const PointEstimate> values, double r,
                                                   const StableIndexSet& indices,
                                                   const HolderOptions& options = {}) {
    if (values.size() < options.min_points)
        throw EstimationError("insufficient resolution: need at least " + std::to_string(options.min_points) +
                              " grid points");
    double lo = values.front().report.estimate, hi = lo, widest = 0.0, sup = 0.0;
    for (const auto& v : values) {
        lo = std::min(lo, v.report.estimate);
        hi = std::max(hi, v.report.estimate);
        widest = std::max(widest, v.report.ci95_hi - v.report.ci95_lo);
        sup = std::max(sup, std::abs(v.report.estimate));
    }
    if (!(widest <= options.max_ci_fraction * (hi - lo)))
        throw EstimationError("insufficient resolution: confidence intervals are wide compared with the value spread");

    HolderFit fit;
    fit.r_scale = indices.regularity_scale(r);
    std::vector<double> log_dist, log_diff;
    for (std::size_t i = 0; i < values.size(); ++i) {
        for (std::size_t j = i + 1; j < values.size(); ++j) {
            const double dist = (values[i].x - values[j].x).norm();
            if (dist == 0.0) continue;
            const double diff = std::abs(values[i].report.estimate - values[j].report.estimate);
            const double se = std::hypot(values[i].report.std_error, values[j].report.std_error);
            if (!(diff > options.separation_se * se)) continue;
            log_dist.push_back(std::log(dist / fit.r_scale));
            log_diff.push_back(std::log(diff));
        }
    }
    fit.pairs_used = log_dist.size();
    if (fit.pairs_used < options.min_pairs)
        throw EstimationError("insufficient resolution: only " + std::to_string(fit.pairs_used) +
                              " informative pairs");
    const auto line = fit_line(log_dist, log_diff);
    fit.beta_hat = line.slope;
    fit.beta_se = line.slope_se;
    fit.beta_ci_lo = line.slope - z95 * line.slope_se;
    fit.beta_ci_hi = line.slope + z95 * line.slope_se;
    fit.residual = line.residual_rms;
    const double norm = options.sup_norm.value_or(sup);
    fit.c_hat = norm > 0.0 ? std::exp(line.intercept) / norm : 0.0;
    return fit;
}

struct OscillationLevel {
    int k;
    double radius;       // rho^k
    double oscillation;  // max - min of the estimated h over the grid in M_{rho^k}(x0)
    double std_error;
    std::size_t n_samples;
};

struct OscillationResult {
    std::vector<OscillationLevel> levels;
    EstimateReport mean_ratio;      // mean of osc_{k+1} / osc_k over the resolved levels
    double upper_bound_95 = 0.0;    // one-sided upper 95% bound on the mean ratio
    int resolved_levels = 0;
    std::vector<std::string> flags;
};

struct OscillationSpec {
    Vec x0;
    Payoff payoff;
    AnisotropicBox domain;  // harmonicity domain; must contain every M_{rho^k}(x0)
    double rho = 0.5;
    int k_max = 3;
    int points_per_axis = 3;
    double fill = 0.9;
    double noise_floor_se = 3.0;  // levels whose oscillation is below this many SEs end the scan
};

[[nodiscard]] inline OscillationResult oscillation_decay(const OscillationSpec& os, const EnsembleSpec& spec) {
    spec.validate();
    require_config(os.rho > 0.0 && os.rho < 1.0, "rho must lie in (0,1)");
    require_config(os.k_max >= 1, "k_max must be at least 1");
    const AxisBox hull = os.domain.closure();
    const detail::Stopwatch clock;
    OscillationResult result;
    std::size_t point_counter = 0;
    for (int k = 0; k <= os.k_max; ++k) {
        const double radius = std::pow(os.rho, k);
        const AnisotropicBox box(os.x0, radius, 1.0, spec.indices);
        const AxisBox level_hull = box.closure();
        for (Eigen::Index i = 0; i < os.x0.size(); ++i)
            require_config(level_hull.lo[i] > hull.lo[i] && level_hull.hi[i] < hull.hi[i],
                           "nested box M_{rho^k}(x0) must lie inside the harmonicity domain");
        const auto grid = anisotropic_grid(box, os.points_per_axis, os.fill);
        EnsembleSpec level_spec = spec;
        level_spec.seed = derive_seed(spec.seed, 1000003ULL + point_counter);
        point_counter += grid.size();
        const auto values = harmonic_evaluate(os.payoff, os.domain, grid, level_spec);
        const auto [lo, hi] = std::minmax_element(values.begin(), values.end(), [](const auto& a, const auto& b) {
            return a.report.estimate < b.report.estimate;
        });
        result.levels.push_back({k, radius, hi->report.estimate - lo->report.estimate,
                                 std::hypot(hi->report.std_error, lo->report.std_error),
                                 values.size() * spec.n_paths});
    }

    int resolved = 0;
    for (const auto& level : result.levels) {
        if (!(level.oscillation > os.noise_floor_se * level.std_error)) break;
        ++resolved;
    }
    result.resolved_levels = resolved;
    if (resolved < static_cast<int>(result.levels.size()))
        result.flags.emplace_back("oscillation below the noise floor from k = " + std::to_string(resolved) +
                                  "; later levels excluded");
    if (resolved < 2) {
        result.flags.emplace_back("fewer than two resolved levels; no ratio available");
        detail::stamp(result.mean_ratio, spec.seed, clock.seconds());
        return result;
    }
    double sum = 0.0, var = 0.0;
    const int ratios = resolved - 1;
    for (int k = 0; k < ratios; ++k) {
        const auto& a = result.levels[static_cast<std::size_t>(k)];
        const auto& b = result.levels[static_cast<std::size_t>(k + 1)];
        const double q = b.oscillation / a.oscillation;
        sum += q;
        var += q * q * (std::pow(b.std_error / b.oscillation, 2) + std::pow(a.std_error / a.oscillation, 2));
    }
    auto& m = result.mean_ratio;
    m.estimate = sum / ratios;
    m.std_error = std::sqrt(var) / ratios;
    m.ci95_lo = m.estimate - z95 * m.std_error;
    m.ci95_hi = m.estimate + z95 * m.std_error;
    m.n_samples = static_cast<std::size_t>(ratios);
    detail::stamp(m, spec.seed, clock.seconds());
    result.upper_bound_95 = m.estimate + 1.6448536269514722 * m.std_error;
    return result;
}

/// Empirical E cos(xi Y_1) against exp(-|xi|^gamma) for a grid of (gamma, xi) cells.
struct CharacteristicCell {
    double gamma;
    double xi;
    double expected;
    EstimateReport report;
    double z_score;
};

[[nodiscard]] inline std::vector<CharacteristicCell> characteristic_function_check(
    std::span<const double> gammas, std::span<const double> xis, std::size_t n, std::uint64_t seed,
    unsigned threads = 1) {
    require_config(n >= 2, "need at least two samples");
    std::vector<CharacteristicCell> cells;
    std::uint64_t tag = 0;
    for (double gamma : gammas) {
        require_config(gamma > 0.0 && gamma < 2.0, "gamma must lie in the open interval (0,2)");
        for (double xi : xis) {
            const std::uint64_t cell_seed = derive_seed(seed, tag++);
            const detail::Stopwatch clock;
            const auto values = parallel_map(n, threads, [&](std::size_t i) {
                Stream rng(cell_seed, i);
                return std::cos(xi * sample_stable_increment(gamma, 1.0, rng));
            });
            auto report = mean_report(values);
            detail::stamp(report, seed, clock.seconds());
            const double expected = std::exp(-std::pow(std::abs(xi), gamma));
            const double z = report.std_error > 0.0 ? (report.estimate - expected) / report.std_error : 0.0;
            cells.push_back({gamma, xi, expected, report, z});
        }
    }
    return cells;
}

} // namespace anisolab
