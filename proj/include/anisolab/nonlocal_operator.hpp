#pragma once

// The generator
//   Lf(x) = sum_j int (f(x + a_j(x) h) - f(x) - h 1{|h|<=1} grad f(x).a_j(x)) c_j |h|^(-1-alpha_j) dh,
// the jump-intensity kernel kappa(x, E), and the two martingale identities (Dynkin and
// Levy system) checked against simulated ensembles.

#include "anisolab/coefficients.hpp"
#include "anisolab/geometry.hpp"
#include "anisolab/parallel.hpp"
#include "anisolab/quadrature.hpp"
#include "anisolab/sde_engine.hpp"
#include "anisolab/stable_driver.hpp"
#include "anisolab/statistics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

namespace anisolab {

struct QuadratureConfig {
    double inner_cut = 1e-4;
    double outer_cut = 1e5;
    double tolerance = 1e-10;
    double abs_tolerance = 1e-13;
    std::size_t max_refinements = 400000;

    void validate() const {
        require_config(inner_cut > 0.0 && inner_cut < 1.0, "inner_cut must lie in (0,1)");
        require_config(outer_cut > 1.0, "outer_cut must exceed 1");
        require_config(tolerance > 0.0, "quadrature tolerance must be positive");
        require_config(max_refinements > 0, "max_refinements must be positive");
    }
};

using ScalarField = std::function<double(const Vec&)>;

/// One-sided integral  c_alpha * int_0^inf (g(h) - 2 f0) h^(-1-alpha) dh  for a symmetric
/// pair sum g(h) = f(x + a h) + f(x - a h), f0 = f(x).
///
/// Pieces: [0, inner_cut] uses the quadratic behaviour of the pair difference;
/// [inner_cut, 1] is integrated in s = log h; [1, outer_cut] directly; beyond outer_cut the
/// pair difference is replaced by its mean over [outer_cut/2, outer_cut].
template <class PairSum>
[[nodiscard]] double paired_levy_integral(PairSum&& pair_sum, double f0, double alpha,
                                          const QuadratureConfig& q) {
    q.validate();
    auto phi = [&](double h) { return pair_sum(h) - 2.0 * f0; };
    const double ic = q.inner_cut, oc = q.outer_cut;

    double total = 0.0, error = 0.0;
    try {
        const double inner = phi(ic) * std::pow(ic, -alpha) / (2.0 - alpha);
        total += inner;
        // The pair difference cannot resolve below the rounding level of f, and the weight
        // h^(-alpha) in the log variable amplifies that floor near inner_cut.
        const double scale = std::max(std::abs(f0), 0.5 * std::abs(pair_sum(ic)));
        const double abs_tol = std::max(q.abs_tolerance, 64.0 * std::numeric_limits<double>::epsilon() *
                                                             scale * std::pow(ic, -alpha));

        auto log_integrand = [&](double s) {
            const double h = std::exp(s);
            return phi(h) * std::exp(-alpha * s);
        };
        const auto mid = integrate_adaptive(log_integrand, uniform_breakpoints(std::log(ic), 0.0, 16),
                                            q.tolerance, abs_tol, q.max_refinements);
        total += mid.value;
        error += mid.error;

        auto power_integrand = [&](double h) { return phi(h) * std::pow(h, -1.0 - alpha); };
        const auto outer = integrate_adaptive(power_integrand, geometric_breakpoints(1.0, oc, 128),
                                              q.tolerance, abs_tol, q.max_refinements);
        total += outer.value;
        error += outer.error;

        const auto window = integrate_adaptive(phi, uniform_breakpoints(0.5 * oc, oc, 128),
                                               q.tolerance, q.abs_tolerance * oc, q.max_refinements);
        const double window_mean = window.value / (0.5 * oc);
        total += window_mean * std::pow(oc, -alpha) / alpha;
    } catch (const ConvergenceError& e) {
        throw ConvergenceError(e.what(), levy_constant(alpha) * (total + e.estimate()),
                               levy_constant(alpha) * (error + e.error_estimate()));
    }
    return levy_constant(alpha) * total;
}

/// Applies the generator to f at x. The compensator term drops out because each axis
/// integral is evaluated on symmetric pairs h, -h; f therefore needs no gradient.
[[nodiscard]] inline double generator_apply(const ScalarField& f, const Vec& x,
                                            const CoefficientField& field,
                                            const StableIndexSet& indices,
                                            const QuadratureConfig& q = {}) {
    require_same_dimension(x.size(), static_cast<Eigen::Index>(indices.dimension()));
    const Mat a = field(x);
    const double f0 = f(x);
    Vec y(x.size());
    double total = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const auto column = a.col(j);
        auto pair_sum = [&](double h) {
            y = x + h * column;
            const double plus = f(y);
            y = x - h * column;
            const double minus = f(y);
            const double sum = plus + minus;
            // Differences at the rounding level of the three samples are treated as exact
            // cancellation; otherwise affine f leaves noise growing with h in the tail.
            const double noise = 8.0 * std::numeric_limits<double>::epsilon() *
                                 (std::abs(plus) + std::abs(minus) + 2.0 * std::abs(f0));
            return std::abs(sum - 2.0 * f0) <= noise ? 2.0 * f0 : sum;
        };
        total += paired_levy_integral(pair_sum, f0, indices[static_cast<std::size_t>(j)], q);
    }
    return total;
}

/// int_R (1 - cos(xi h)) c_gamma |h|^(-1-gamma) dh by the same quadrature path as the
/// generator; equals |xi|^gamma when c_gamma is correctly normalised.
[[nodiscard]] inline double levy_symbol_quadrature(double gamma, double xi, const QuadratureConfig& q = {}) {
    auto pair_sum = [&](double h) { return 2.0 * std::cos(xi * h); };
    return -paired_levy_integral(pair_sum, 1.0, gamma, q);
}

namespace detail {
/// Mass of c|h|^(-1-alpha) dh over [lo, hi] for an interval not containing 0.
inline double power_law_mass(double lo, double hi, double alpha, double c) {
    if (hi <= lo) return 0.0;
    if (lo > 0.0) {
        const double upper = std::isinf(hi) ? 0.0 : std::pow(hi, -alpha);
        return c * (std::pow(lo, -alpha) - upper) / alpha;
    }
    return power_law_mass(-hi, -lo, alpha, c);
}

/// {h : x + h u in box} as a closed interval; empty when lo > hi.
inline std::pair<double, double> line_box_interval(const Vec& x, const Eigen::Ref<const Vec>& u,
                                                   const AxisBox& box) {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (u[i] == 0.0) {
            if (x[i] < box.lo[i] || x[i] > box.hi[i]) return {1.0, -1.0};
            continue;
        }
        double t1 = (box.lo[i] - x[i]) / u[i];
        double t2 = (box.hi[i] - x[i]) / u[i];
        if (t1 > t2) std::swap(t1, t2);
        lo = std::max(lo, t1);
        hi = std::min(hi, t2);
    }
    return {lo, hi};
}
} // namespace detail

/// kappa(x, E) = sum_k int 1_E(x + a_k(x) h) c_k |h|^(-1-alpha_k) dh, exact for unions of
/// axis boxes. Overlapping boxes are merged along each line before integrating.
[[nodiscard]] inline double jump_intensity(const Vec& x, const BoxUnion& target, const Mat& a,
                                           const StableIndexSet& indices) {
    for (const auto& box : target.boxes)
        if (!(box.distance_to(x) > 0.0))
            throw std::domain_error("jump_intensity: the target set touches the evaluation point");
    double total = 0.0;
    std::vector<std::pair<double, double>> pieces;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double alpha = indices[static_cast<std::size_t>(k)];
        const double c = levy_constant(alpha);
        pieces.clear();
        for (const auto& box : target.boxes) {
            auto [lo, hi] = detail::line_box_interval(x, a.col(k), box);
            if (lo < hi) pieces.emplace_back(lo, hi);
        }
        std::sort(pieces.begin(), pieces.end());
        double cur_lo = 0, cur_hi = 0;
        bool open = false;
        for (const auto& [lo, hi] : pieces) {
            if (open && lo <= cur_hi) {
                cur_hi = std::max(cur_hi, hi);
                continue;
            }
            if (open) total += detail::power_law_mass(cur_lo, cur_hi, alpha, c);
            cur_lo = lo;
            cur_hi = hi;
            open = true;
        }
        if (open) total += detail::power_law_mass(cur_lo, cur_hi, alpha, c);
    }
    return total;
}

[[nodiscard]] inline double jump_intensity(const Vec& x, const BoxUnion& target,
                                           const CoefficientField& field,
                                           const StableIndexSet& indices) {
    return jump_intensity(x, target, field(x), indices);
}

/// Streams the two sides of the Levy-system identity along one path: the number of jumps
/// from D into E, and the left-point Riemann sum of 1_D(X_s) kappa(X_s, E) ds over the
/// monitored times.
template <Region D>
class TransitionObserver {
public:
    TransitionObserver(const D& from, const BoxUnion& to, const CoefficientField& field,
                       const StableIndexSet& indices)
        : from_(from), to_(to), field_(field), indices_(indices), a_(field.dimension(), field.dimension()) {}

    bool on_start(const Vec& x) {
        last_time_ = 0.0;
        weight_ = weight(x);
        return true;
    }
    bool on_step(double t, const Vec& x) {
        advance(t);
        weight_ = weight(x);
        return true;
    }
    bool on_jump(double t, Eigen::Index, double, const Vec& pre, const Vec& post) {
        advance(t);
        if (from_.contains(pre) && to_.contains(post)) ++count_;
        weight_ = weight(post);
        return true;
    }

    [[nodiscard]] std::size_t count() const noexcept { return count_; }
    [[nodiscard]] double integrated_intensity() const noexcept { return integral_; }

private:
    double weight(const Vec& x) {
        if (!from_.contains(x)) return 0.0;
        field_.evaluate(x, a_);
        return jump_intensity(x, to_, a_, indices_);
    }
    void advance(double t) {
        integral_ += weight_ * (t - last_time_);
        last_time_ = t;
    }

    const D& from_;
    const BoxUnion& to_;
    const CoefficientField& field_;
    const StableIndexSet& indices_;
    Mat a_;
    double last_time_ = 0.0;
    double weight_ = 0.0;
    double integral_ = 0.0;
    std::size_t count_ = 0;
};

struct LevySystemSpec {
    Vec x0;
    std::shared_ptr<const CoefficientField> field;
    StableIndexSet indices;
    AnisotropicBox from;
    BoxUnion to;
    double horizon = 1.0;
    std::size_t n_paths = 10000;
    std::uint64_t seed = 0;
    SimulationConfig simulation;  // horizon is overridden
    unsigned threads = 1;
};

struct LevySystemResult {
    EstimateReport mean_count;
    EstimateReport mean_integrated_intensity;
    double z_score = 0.0;
    bool degenerate = false;  // no transitions expected: both sides vanish identically
};

[[nodiscard]] inline LevySystemResult levy_system_check(const LevySystemSpec& spec) {
    require_config(spec.field != nullptr, "levy_system_check: missing coefficient field");
    require_config(spec.to.distance_to(spec.from.closure()) > 0.0,
                   "levy_system_check: D and E must have positive distance");
    require_config(spec.n_paths >= 2, "levy_system_check: need at least two paths");
    SimulationConfig sim = spec.simulation;
    sim.horizon = spec.horizon;
    sim.grid_step = std::min(sim.grid_step, spec.horizon);

    const auto start = std::chrono::steady_clock::now();
    auto per_path = parallel_map(spec.n_paths, spec.threads, [&](std::size_t i) {
        Stream rng(spec.seed, i);
        TransitionObserver<AnisotropicBox> obs(spec.from, spec.to, *spec.field, spec.indices);
        simulate(spec.x0, *spec.field, spec.indices, sim, rng, obs);
        return std::pair{static_cast<double>(obs.count()), obs.integrated_intensity()};
    });
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::vector<double> counts(per_path.size()), integrals(per_path.size()), diffs(per_path.size());
    for (std::size_t i = 0; i < per_path.size(); ++i) {
        counts[i] = per_path[i].first;
        integrals[i] = per_path[i].second;
        diffs[i] = counts[i] - integrals[i];
    }
    LevySystemResult result;
    result.mean_count = mean_report(counts);
    result.mean_integrated_intensity = mean_report(integrals);
    for (auto* r : {&result.mean_count, &result.mean_integrated_intensity}) {
        r->seed = spec.seed;
        r->wall_time = elapsed;
    }
    const auto diff = mean_report(diffs);
    if (diff.std_error > 0.0) {
        result.z_score = diff.estimate / diff.std_error;
    } else {
        result.degenerate = true;
        result.z_score = 0.0;
    }
    if (result.mean_integrated_intensity.estimate == 0.0) result.degenerate = true;
    return result;
}

/// Records the state at the horizon.
struct FinalStateObserver {
    Vec state;
    bool on_start(const Vec& x) {
        state = x;
        return true;
    }
    bool on_step(double, const Vec& x) {
        state = x;
        return true;
    }
    bool on_jump(double, Eigen::Index, double, const Vec&, const Vec& post) {
        state = post;
        return true;
    }
};

struct DynkinRow {
    double t;
    EstimateReport quotient;  // (E f(X_t) - f(x0)) / t
    double generator_value;   // Lf(x0)
};

[[nodiscard]] inline std::vector<DynkinRow> dynkin_check(
    const ScalarField& f, const Vec& x0, const CoefficientField& field, const StableIndexSet& indices,
    std::span<const double> t_list, std::size_t n_paths, std::uint64_t seed,
    const SimulationConfig& simulation, unsigned threads = 1, const QuadratureConfig& q = {}) {
    require_config(n_paths >= 2, "dynkin_check: need at least two paths");
    const double generator_value = generator_apply(f, x0, field, indices, q);
    const double f0 = f(x0);
    std::vector<DynkinRow> rows;
    for (std::size_t k = 0; k < t_list.size(); ++k) {
        const double t = t_list[k];
        require_config(t > 0.0, "dynkin_check: times must be positive");
        SimulationConfig sim = simulation;
        sim.horizon = t;
        sim.grid_step = std::min(sim.grid_step, t);
        const std::uint64_t sub_seed = derive_seed(seed, k);
        const auto start = std::chrono::steady_clock::now();
        auto quotients = parallel_map(n_paths, threads, [&](std::size_t i) {
            Stream rng(sub_seed, i);
            FinalStateObserver obs;
            simulate(x0, field, indices, sim, rng, obs);
            return (f(obs.state) - f0) / t;
        });
        auto report = mean_report(quotients);
        report.seed = seed;
        report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        rows.push_back({t, report, generator_value});
    }
    return rows;
}

} // namespace anisolab
