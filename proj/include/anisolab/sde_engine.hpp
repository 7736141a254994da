#pragma once

// Jump-adapted Euler scheme for dX^i = sum_j A_ij(X_-) dZ^j.
//
// Each driver Z^j is split at the jump threshold. Big jumps arrive as independent
// Poisson streams and are applied exactly at their event times using A at the left
// limit. Between events the small components move the state with A frozen at the start
// of the sub-interval. The state is monitored at every grid point and at every jump
// (both the left limit and the post-jump value), and an Observer decides when to stop.

#include "anisolab/coefficients.hpp"
#include "anisolab/core.hpp"
#include "anisolab/geometry.hpp"
#include "anisolab/random.hpp"
#include "anisolab/stable_driver.hpp"

#include <algorithm>
#include <cmath>
#include <concepts>
#include <functional>
#include <optional>
#include <sstream>
#include <vector>

namespace anisolab {

struct SimulationConfig {
    double jump_threshold = 0.01;
    double grid_step = 1e-3;
    double horizon = 1.0;

    void validate() const {
        require_config(jump_threshold > 0.0, "jump_threshold must be positive");
        require_config(grid_step > 0.0, "grid_step must be positive");
        require_config(horizon > 0.0, "horizon must be positive");
    }
};

/// Configuration scaled to a box: threshold 0.1 * smallest halfwidth, grid step
/// `grid_fraction` of the fastest per-axis time scale halfwidth_i^alpha_i, horizon
/// `horizon_multiple` times the slowest one.
[[nodiscard]] inline SimulationConfig default_config_for(const AnisotropicBox& box,
                                                         const StableIndexSet& indices,
                                                         double grid_fraction = 0.02,
                                                         double horizon_multiple = 50.0) {
    const Vec& hw = box.halfwidths();
    double fastest = std::numeric_limits<double>::infinity();
    double slowest = 0.0;
    for (Eigen::Index i = 0; i < hw.size(); ++i) {
        const double scale = std::pow(hw[i], indices[static_cast<std::size_t>(i)]);
        fastest = std::min(fastest, scale);
        slowest = std::max(slowest, scale);
    }
    return {0.1 * hw.minCoeff(), grid_fraction * fastest, horizon_multiple * slowest};
}

template <class R>
concept Region = requires(const R& region, const Vec& x) {
    { region.contains(x) } -> std::convertible_to<bool>;
};

/// Adapts a plain predicate to the Region interface.
struct PredicateRegion {
    std::function<bool(const Vec&)> predicate;
    [[nodiscard]] bool contains(const Vec& x) const { return predicate(x); }
};

/// Complement of a region.
template <Region R>
struct Outside {
    const R& region;
    [[nodiscard]] bool contains(const Vec& x) const { return !region.contains(x); }
};

/// Observer protocol: every callback returns false to stop the simulation.
template <class O>
concept PathObserver = requires(O& o, double t, Eigen::Index axis, double h, const Vec& x) {
    { o.on_start(x) } -> std::convertible_to<bool>;
    { o.on_step(t, x) } -> std::convertible_to<bool>;
    { o.on_jump(t, axis, h, x, x) } -> std::convertible_to<bool>;
};

inline constexpr double singular_determinant_tolerance = 1e-12;

/// Runs one path from x0 until the horizon or until the observer stops it.
/// Returns the time reached.
template <PathObserver Observer>
double simulate(const Vec& x0, const CoefficientField& field, const StableIndexSet& indices,
                const SimulationConfig& config, Stream& rng, Observer& observer) {
    config.validate();
    const Eigen::Index d = x0.size();
    require_same_dimension(d, static_cast<Eigen::Index>(indices.dimension()));
    require_same_dimension(d, field.dimension());

    std::vector<TruncatedDriver> drivers;
    drivers.reserve(static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < indices.dimension(); ++i)
        drivers.emplace_back(indices[i], config.jump_threshold);

    std::vector<double> next_jump(static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < drivers.size(); ++i) next_jump[i] = drivers[i].next_arrival(rng);

    Vec x = x0;
    Vec pre(d);
    Vec dz(d);
    Mat a(d, d);

    auto evaluate_at = [&](const Vec& at) {
        const double det = field.determinant(at);
        if (!(std::abs(det) > singular_determinant_tolerance)) {
            std::ostringstream msg;
            msg << "coefficient matrix is singular (det = " << det << ") at x = ["
                << at.transpose() << "]";
            throw SimulationError(msg.str());
        }
        field.evaluate(at, a);
    };

    if (!observer.on_start(x)) return 0.0;

    double t = 0.0;
    std::size_t step = 0;
    while (t < config.horizon) {
        ++step;
        const double t_end = std::min(config.horizon, static_cast<double>(step) * config.grid_step);
        evaluate_at(x);
        while (true) {
            // Earliest pending big jump inside the step; ties go to the smallest axis.
            Eigen::Index axis = -1;
            double t_next = t_end;
            for (std::size_t i = 0; i < next_jump.size(); ++i) {
                if (next_jump[i] < t_next) {
                    t_next = next_jump[i];
                    axis = static_cast<Eigen::Index>(i);
                }
            }
            if (t_next > t) {
                for (std::size_t i = 0; i < drivers.size(); ++i)
                    dz[static_cast<Eigen::Index>(i)] = drivers[i].small_increment(t_next - t, rng);
                x.noalias() += a * dz;
            }
            t = t_next;
            if (axis < 0) break;

            const auto& driver = drivers[static_cast<std::size_t>(axis)];
            pre = x;
            evaluate_at(pre);
            const double h = driver.big_jump_size(rng);
            x.noalias() += h * a.col(axis);
            next_jump[static_cast<std::size_t>(axis)] += driver.next_arrival(rng);
            if (!observer.on_jump(t, axis, h, pre, x)) return t;
            evaluate_at(x);
        }
        if (!observer.on_step(t, x)) return t;
    }
    return t;
}

struct JumpMark {
    double time;
    Eigen::Index axis;
    double size;
    Vec pre_state;
    Vec post_state;
};

/// Skeleton of a simulated path: states at grid points and (post-jump) jump times.
struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> states;
    std::vector<JumpMark> jump_marks;
};

struct TrajectoryRecorder {
    Trajectory trajectory;

    bool on_start(const Vec& x) {
        record(0.0, x);
        return true;
    }
    bool on_step(double t, const Vec& x) {
        record(t, x);
        return true;
    }
    bool on_jump(double t, Eigen::Index axis, double h, const Vec& pre, const Vec& post) {
        trajectory.jump_marks.push_back({t, axis, h, pre, post});
        record(t, post);
        return true;
    }

private:
    void record(double t, const Vec& x) {
        // Simultaneous events (probability zero) collapse onto one time stamp.
        if (!trajectory.times.empty() && !(t > trajectory.times.back())) {
            trajectory.states.back() = x;
            return;
        }
        trajectory.times.push_back(t);
        trajectory.states.push_back(x);
    }
};

[[nodiscard]] inline Trajectory simulate_path(const Vec& x0, const CoefficientField& field,
                                              const StableIndexSet& indices,
                                              const SimulationConfig& config, Stream& rng) {
    TrajectoryRecorder recorder;
    simulate(x0, field, indices, config, rng, recorder);
    return std::move(recorder.trajectory);
}

struct ExitRecord {
    double exit_time = 0.0;
    Vec exit_state;
    Vec pre_exit_state;
    std::optional<double> hit_time;
    std::optional<Vec> hit_state;
    bool censored = false;  // horizon reached first: exit_time is the elapsed time, exit_state the last state
};

/// Stops at the first monitored state outside `domain`; optionally records the first
/// monitored state inside `target` before that.
template <Region Domain, Region Target = PredicateRegion>
class ExitObserver {
public:
    explicit ExitObserver(const Domain& domain, const Target* target = nullptr)
        : domain_(domain), target_(target) {}

    bool on_start(const Vec& x) {
        last_ = x;
        return visit(0.0, x, x);
    }
    bool on_step(double t, const Vec& x) { return visit(t, x, last_); }
    bool on_jump(double t, Eigen::Index, double, const Vec& pre, const Vec& post) {
        // The left limit is attained strictly before the jump time.
        if (!visit(std::nextafter(t, 0.0), pre, last_)) return false;
        return visit(t, post, pre);
    }

    [[nodiscard]] bool exited() const noexcept { return exited_; }
    [[nodiscard]] ExitRecord record() const { return record_; }
    [[nodiscard]] const Vec& last_state() const noexcept { return last_; }

private:
    bool visit(double t, const Vec& x, const Vec& previous) {
        if (!domain_.contains(x)) {
            exited_ = true;
            record_.exit_time = t;
            record_.exit_state = x;
            record_.pre_exit_state = previous;
            return false;
        }
        if (target_ != nullptr && !record_.hit_time && target_->contains(x)) {
            record_.hit_time = t;
            record_.hit_state = x;
        }
        last_ = x;
        return true;
    }

    const Domain& domain_;
    const Target* target_;
    Vec last_;
    bool exited_ = false;
    ExitRecord record_;
};

template <Region Domain>
[[nodiscard]] ExitRecord first_exit(const Vec& x0, const CoefficientField& field,
                                    const StableIndexSet& indices, const Domain& domain,
                                    const SimulationConfig& config, Stream& rng) {
    ExitObserver<Domain> observer(domain);
    const double elapsed = simulate(x0, field, indices, config, rng, observer);
    if (observer.exited()) return observer.record();
    ExitRecord censored;
    censored.censored = true;
    censored.exit_time = elapsed;
    censored.exit_state = observer.last_state();
    censored.pre_exit_state = observer.last_state();
    return censored;
}

/// First entrance into `target`, monitored until the path leaves `enclosing`.
/// A state outside the enclosing set counts as an exit even if it lies in the target.
template <Region Target, Region Domain>
[[nodiscard]] ExitRecord first_hit(const Vec& x0, const CoefficientField& field,
                                   const StableIndexSet& indices, const Target& target,
                                   const Domain& enclosing, const SimulationConfig& config,
                                   Stream& rng) {
    ExitObserver<Domain, Target> observer(enclosing, &target);
    const double elapsed = simulate(x0, field, indices, config, rng, observer);
    if (observer.exited()) return observer.record();
    ExitRecord censored = observer.record();
    censored.censored = true;
    censored.exit_time = elapsed;
    censored.exit_state = observer.last_state();
    censored.pre_exit_state = observer.last_state();
    return censored;
}

/// Jump marks with pre-state in `from` and post-state in `to`.
template <Region From, Region To>
[[nodiscard]] std::size_t count_transitions(const Trajectory& trajectory, const From& from,
                                            const To& to) {
    return static_cast<std::size_t>(std::count_if(
        trajectory.jump_marks.begin(), trajectory.jump_marks.end(), [&](const JumpMark& m) {
            return from.contains(m.pre_state) && to.contains(m.post_state);
        }));
}

} // namespace anisolab
