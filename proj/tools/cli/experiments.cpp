#include "cli/experiments.hpp"

#include <cstdio>
#include <sstream>

namespace anisolab::cli {

using nlohmann::json;

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    for (int precision = 6; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

namespace {

std::string format_point(const Vec& x) {
    std::string out;
    for (Eigen::Index i = 0; i < x.size(); ++i) out += (i ? ";" : "") + format_number(x[i]);
    return out;
}

json simulation_json(const SimulationConfig& c) {
    return {{"jump_threshold", c.jump_threshold}, {"grid_step", c.grid_step}, {"horizon", c.horizon}};
}

EstimateReport point_report(double value, std::uint64_t seed, std::size_t n = 0) {
    EstimateReport r;
    r.estimate = r.ci95_lo = r.ci95_hi = value;
    r.n_samples = n;
    r.seed = seed;
    return r;
}

void add_series(PlotSpec& plot, std::string label, const std::vector<ResultRow>& rows, auto&& x_of) {
    PlotSeries s;
    s.label = std::move(label);
    for (const auto& row : rows) {
        s.x.push_back(x_of(row));
        s.y.push_back(row.report.estimate);
        s.lo.push_back(row.report.ci95_lo);
        s.hi.push_back(row.report.ci95_hi);
    }
    plot.series.push_back(std::move(s));
}

double param_of(const ResultRow& row) { return std::strtod(row.param_value.c_str(), nullptr); }

ExperimentResult run_scaling(const ScalingScan& scan, const std::string& param, const std::string& slope_label,
                             std::uint64_t seed) {
    ExperimentResult out;
    for (const auto& p : scan.points) out.rows.push_back({param, format_number(p.parameter), p.report});
    if (scan.fit.points >= 2) {
        out.rows.push_back({"slope", slope_label, scan.slope});
    } else {
        EstimateReport missing = point_report(std::nan(""), seed);
        out.rows.push_back({"slope", slope_label, missing});
    }
    out.flags = scan.flags;
    return out;
}

ExperimentResult exit_time(const ExperimentConfig& c, const ExitTimeParams& p, unsigned threads) {
    const auto spec = c.ensemble(threads);
    const auto scan = estimate_exit_time(p.center, p.r_list, spec, p.start);
    auto out = run_scaling(scan, "r", "log_tau_vs_log_r", c.seed);
    for (double r : p.r_list)
        out.derived["simulation"][format_number(r)] =
            simulation_json(spec.simulation_for(AnisotropicBox(p.center, r, 1.0, spec.indices)));
    out.plot = {"Mean exit time from M_r", "r", "E[tau]", true, true, {}};
    std::vector<ResultRow> points(out.rows.begin(), out.rows.end() - 1);
    add_series(out.plot, "estimate", points, param_of);
    return out;
}

ExperimentResult jump_exit(const ExperimentConfig& c, const JumpExitParams& p, unsigned threads) {
    const auto spec = c.ensemble(threads);
    const auto scan = estimate_big_jump_exit(p.center, p.r, p.R_list, spec);
    auto out = run_scaling(scan, "R", "log_p_vs_log_R", c.seed);
    out.derived["simulation"] = simulation_json(spec.simulation_for(AnisotropicBox(p.center, p.r, 1.0, spec.indices)));
    out.plot = {"Exit beyond M_R from M_r", "R", "P(X_tau outside M_R)", true, true, {}};
    std::vector<ResultRow> points;
    for (auto it = out.rows.begin(); it + 1 != out.rows.end(); ++it)
        if (it->report.estimate > 0.0) points.push_back(*it);
    add_series(out.plot, "estimate", points, param_of);
    return out;
}

ExperimentResult targeted_jump(const ExperimentConfig& c, const TargetedJumpParams& p, unsigned threads) {
    const auto spec = c.ensemble(threads);
    ExperimentResult out;
    for (double g : p.gamma_list) {
        TargetedJump event{p.x0, p.axis - 1, p.xi, g, p.t0, p.r, p.targeting_threshold};
        out.rows.push_back({"gamma", format_number(g), estimate_targeted_jump(event, spec)});
    }
    out.derived["targeting_threshold"] = p.xi == 0.0 ? json(nullptr) : json(p.targeting_threshold.value_or(0.5 * std::abs(p.xi)));
    out.plot = {"Targeted jump event", "gamma", "probability", false, false, {}};
    add_series(out.plot, "estimate", out.rows, param_of);
    return out;
}

ExperimentResult tube(const ExperimentConfig& c, const TubeParams& p, unsigned threads) {
    const auto spec = c.ensemble(threads);
    const auto curve = Polyline::uniform(p.path, p.t0);
    ExperimentResult out;
    for (double eps : p.epsilon_list)
        out.rows.push_back({"epsilon", format_number(eps), estimate_tube_probability(p.x0, curve, eps, p.r, spec)});
    out.derived["path_times"] = curve.times;
    out.plot = {"Tube probability", "epsilon", "probability", false, false, {}};
    add_series(out.plot, "estimate", out.rows, param_of);
    return out;
}

ExperimentResult hit(const ExperimentConfig& c, const HitParams& p, unsigned threads) {
    const auto spec = c.ensemble(threads);
    const AnisotropicBox enclosing(p.enclosing.center, p.enclosing.r, p.enclosing.k, spec.indices);
    ExperimentResult out;
    out.derived["simulation"] = simulation_json(spec.simulation_for(enclosing));
    for (const auto& t : p.targets) {
        BoxUnion target;
        if (t.scale) {
            const Vec hw = *t.scale * enclosing.halfwidths();
            target.boxes.push_back({enclosing.center() - hw, enclosing.center() + hw});
        } else {
            target.boxes = t.boxes;
        }
        const double fraction = target.volume() / enclosing.volume();
        out.rows.push_back({"target_volume_fraction", format_number(fraction), estimate_hitting(p.x0, target, enclosing, spec)});
    }
    out.plot = {"Hitting before exit", "target volume fraction", "probability", false, false, {}};
    add_series(out.plot, "estimate", out.rows, param_of);
    return out;
}

std::vector<PointEstimate> harmonic_values(const ExperimentConfig& c, const HarmonicParams& p, unsigned threads,
                                           ExperimentResult& out) {
    const auto spec = c.ensemble(threads);
    const AnisotropicBox domain(p.domain.center, p.domain.r, p.domain.k, spec.indices);
    const auto grid = p.points.empty() ? anisotropic_grid(domain, p.points_per_axis, p.fill) : p.points;
    out.derived["simulation"] = simulation_json(spec.simulation_for(domain));
    const auto values = harmonic_evaluate(make_payoff(p.payoff), domain, grid, spec);
    for (const auto& v : values) out.rows.push_back({"x", format_point(v.x), v.report});
    const auto axis = static_cast<Eigen::Index>(p.payoff.axis - 1);
    out.plot = {"Harmonic function estimate", "x_" + std::to_string(p.payoff.axis), "h(x)", false, false, {}};
    PlotSeries s;
    s.label = "grid points";
    for (const auto& v : values) {
        s.x.push_back(v.x[axis]);
        s.y.push_back(v.report.estimate);
        s.lo.push_back(v.report.ci95_lo);
        s.hi.push_back(v.report.ci95_hi);
    }
    out.plot.series.push_back(std::move(s));
    return values;
}

ExperimentResult holder(const ExperimentConfig& c, const HolderParams& p, unsigned threads) {
    ExperimentResult out;
    const auto values = harmonic_values(c, p.harmonic, threads, out);
    const auto fit = fit_holder_exponent(values, p.harmonic.domain.r, *c.indices, p.options);
    EstimateReport beta;
    beta.estimate = fit.beta_hat;
    beta.std_error = fit.beta_se;
    beta.ci95_lo = fit.beta_ci_lo;
    beta.ci95_hi = fit.beta_ci_hi;
    beta.n_samples = fit.pairs_used;
    beta.seed = c.seed;
    out.rows.push_back({"holder_beta", "pairs", beta});
    out.rows.push_back({"holder_c", "prefactor", point_report(fit.c_hat, c.seed, fit.pairs_used)});
    out.derived["holder_fit"] = {{"r_scale", fit.r_scale}, {"residual_rms", fit.residual}, {"pairs_used", fit.pairs_used}};
    return out;
}

ExperimentResult oscillation(const ExperimentConfig& c, const OscillationParams& p, unsigned threads) {
    const auto spec = c.ensemble(threads);
    OscillationSpec os{p.x0, make_payoff(p.payoff), AnisotropicBox(p.domain.center, p.domain.r, p.domain.k, spec.indices),
                       p.rho, p.k_max, p.points_per_axis, p.fill};
    const auto result = oscillation_decay(os, spec);
    ExperimentResult out;
    for (const auto& level : result.levels) {
        EstimateReport r;
        r.estimate = level.oscillation;
        r.std_error = level.std_error;
        r.ci95_lo = level.oscillation - z95 * level.std_error;
        r.ci95_hi = level.oscillation + z95 * level.std_error;
        r.n_samples = level.n_samples;
        r.seed = c.seed;
        out.rows.push_back({"osc_k", std::to_string(level.k), r});
    }
    out.rows.push_back({"mean_ratio", "osc_k+1/osc_k", result.mean_ratio});
    out.flags = result.flags;
    out.derived["resolved_levels"] = result.resolved_levels;
    out.derived["mean_ratio_upper95_one_sided"] = result.upper_bound_95;
    out.derived["simulation"] = simulation_json(spec.simulation_for(os.domain));
    out.plot = {"Oscillation over nested boxes M_{rho^k}", "rho^k", "osc", true, true, {}};
    PlotSeries s;
    s.label = "osc_k";
    for (const auto& level : result.levels) {
        if (!(level.oscillation > 0.0)) continue;
        s.x.push_back(level.radius);
        s.y.push_back(level.oscillation);
        s.lo.push_back(level.oscillation - z95 * level.std_error);
        s.hi.push_back(level.oscillation + z95 * level.std_error);
    }
    out.plot.series.push_back(std::move(s));
    return out;
}

ExperimentResult levy_system(const ExperimentConfig& c, const LevySystemParams& p, unsigned threads) {
    const auto spec = c.ensemble(threads);
    LevySystemSpec ls{p.x0,
                      spec.field,
                      spec.indices,
                      AnisotropicBox(p.from.center, p.from.r, p.from.k, spec.indices),
                      BoxUnion{p.to},
                      p.t,
                      spec.n_paths,
                      c.seed,
                      spec.simulation_for(AnisotropicBox(p.from.center, p.from.r, p.from.k, spec.indices)),
                      threads};
    const auto result = levy_system_check(ls);
    ExperimentResult out;
    out.rows.push_back({"mean_count", format_number(p.t), result.mean_count});
    out.rows.push_back({"mean_integrated_intensity", format_number(p.t), result.mean_integrated_intensity});
    out.rows.push_back({"z_score", format_number(p.t), point_report(result.z_score, c.seed, spec.n_paths)});
    if (result.degenerate) out.flags.emplace_back("degenerate configuration: no transitions expected");
    out.derived["simulation"] = simulation_json(ls.simulation);
    out.plot = {"Levy system: jump count vs integrated intensity", "quantity (1 = count, 2 = intensity)", "mean", false, false, {}};
    PlotSeries s;
    s.label = "means";
    for (int i = 0; i < 2; ++i) {
        s.x.push_back(i + 1);
        s.y.push_back(out.rows[static_cast<std::size_t>(i)].report.estimate);
        s.lo.push_back(out.rows[static_cast<std::size_t>(i)].report.ci95_lo);
        s.hi.push_back(out.rows[static_cast<std::size_t>(i)].report.ci95_hi);
    }
    out.plot.series.push_back(std::move(s));
    return out;
}

ExperimentResult dynkin(const ExperimentConfig& c, const DynkinParams& p, unsigned threads) {
    const auto spec = c.ensemble(threads);
    SimulationConfig sim = spec.simulation.value_or(SimulationConfig{0.01, 1e-3, 1.0});
    const auto rows = dynkin_check(make_payoff(p.test_function), p.x0, *spec.field, spec.indices, p.t_list, spec.n_paths,
                                   c.seed, sim, threads, p.quadrature);
    ExperimentResult out;
    for (const auto& r : rows) out.rows.push_back({"t", format_number(r.t), r.quotient});
    const double generator = rows.empty() ? 0.0 : rows.front().generator_value;
    out.rows.push_back({"generator", "x0", point_report(generator, c.seed)});
    out.derived["simulation"] = simulation_json(sim);
    out.plot = {"Dynkin difference quotient", "t", "(E f(X_t) - f(x0)) / t", true, false, {}};
    std::vector<ResultRow> points(out.rows.begin(), out.rows.end() - 1);
    add_series(out.plot, "quotient", points, param_of);
    PlotSeries ref;
    ref.label = "generator";
    for (double t : p.t_list) {
        ref.x.push_back(t);
        ref.y.push_back(generator);
        ref.lo.push_back(generator);
        ref.hi.push_back(generator);
    }
    out.plot.series.push_back(std::move(ref));
    return out;
}

ExperimentResult driver_selftest(const ExperimentConfig& c, const SelftestParams& p, unsigned threads) {
    const auto cells = characteristic_function_check(p.gammas, p.xis, p.n_samples, c.seed, threads);
    ExperimentResult out;
    double z_max = 0.0;
    PlotSeries s;
    s.label = "z-score";
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& cell = cells[i];
        out.rows.push_back({"gamma|xi", format_number(cell.gamma) + "|" + format_number(cell.xi), cell.report});
        z_max = std::max(z_max, std::abs(cell.z_score));
        out.derived["cells"].push_back({{"gamma", cell.gamma}, {"xi", cell.xi}, {"expected", cell.expected}, {"z", cell.z_score}});
        s.x.push_back(static_cast<double>(i + 1));
        s.y.push_back(cell.z_score);
        s.lo.push_back(cell.z_score);
        s.hi.push_back(cell.z_score);
    }
    out.rows.push_back({"z_max", "all_cells", point_report(z_max, c.seed, p.n_samples * cells.size())});
    if (z_max > 3.0) out.flags.emplace_back("some cell deviates by more than 3 standard errors");
    out.plot = {"Characteristic-function z-scores", "cell", "z", false, false, {s}};
    return out;
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, unsigned threads) {
    return std::visit(
        [&](const auto& p) -> ExperimentResult {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, ExitTimeParams>) return exit_time(config, p, threads);
            else if constexpr (std::is_same_v<P, JumpExitParams>) return jump_exit(config, p, threads);
            else if constexpr (std::is_same_v<P, TargetedJumpParams>) return targeted_jump(config, p, threads);
            else if constexpr (std::is_same_v<P, TubeParams>) return tube(config, p, threads);
            else if constexpr (std::is_same_v<P, HitParams>) return hit(config, p, threads);
            else if constexpr (std::is_same_v<P, HarmonicParams>) {
                ExperimentResult out;
                harmonic_values(config, p, threads, out);
                return out;
            } else if constexpr (std::is_same_v<P, HolderParams>) return holder(config, p, threads);
            else if constexpr (std::is_same_v<P, OscillationParams>) return oscillation(config, p, threads);
            else if constexpr (std::is_same_v<P, LevySystemParams>) return levy_system(config, p, threads);
            else if constexpr (std::is_same_v<P, DynkinParams>) return dynkin(config, p, threads);
            else return driver_selftest(config, p, threads);
        },
        config.params);
}

} // namespace anisolab::cli
