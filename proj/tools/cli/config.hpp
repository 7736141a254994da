#pragma once

#include "anisolab/anisolab.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace anisolab::cli {

struct Diagnostic {
    int line = 0;  // 1-based; 0 when no position is known
    std::string field;
    std::string message;
};

[[nodiscard]] std::string format_diagnostic(const Diagnostic& d);

enum class Experiment {
    exit_time,
    jump_exit,
    targeted_jump,
    tube,
    hit,
    harmonic,
    holder,
    oscillation,
    levy_system,
    dynkin,
    driver_selftest,
};

[[nodiscard]] std::string_view experiment_name(Experiment e);
[[nodiscard]] std::optional<Experiment> parse_experiment(std::string_view name);
[[nodiscard]] bool is_scaling_experiment(Experiment e);

struct CoefficientPreset {
    std::string name = "identity";  // identity | constant | diagonal | rotation
    Mat matrix;
    Vec diagonal;
    double theta0 = 0.0;
    double amplitude = 0.0;
    double frequency = 1.0;
    Vec scales;
};

[[nodiscard]] std::shared_ptr<const CoefficientField> make_field(const CoefficientPreset& preset, Eigen::Index d);

struct Sampling {
    std::size_t n_paths = 0;
    std::optional<double> jump_threshold;
    std::optional<double> grid_step;
    std::optional<double> horizon;
    double max_censored_fraction = 0.01;
};

struct BoxSpec {
    Vec center;
    double r = 1.0;
    double k = 1.0;
};

/// Bounded scalar fields selectable by name.
struct PayoffSpec {
    std::string type;  // halfspace | constant | clamped-linear | cosine
    int axis = 1;      // 1-based
    double threshold = 0.0;
    double value = 1.0;
    double slope = 1.0;
    double clamp = 10.0;
    double frequency = 1.0;
    Vec origin;        // cosine phase reference; x0 by default
};

[[nodiscard]] Payoff make_payoff(const PayoffSpec& spec);

struct ExitTimeParams {
    Vec center;
    std::vector<double> r_list;
    std::optional<Vec> start;
};

struct JumpExitParams {
    Vec center;
    double r = 0.1;
    std::vector<double> R_list;
};

struct TargetedJumpParams {
    Vec x0;
    int axis = 1;
    double xi = 0.0;
    std::vector<double> gamma_list;
    double t0 = 1.0;
    double r = 1.0;
    std::optional<double> targeting_threshold;
};

struct TubeParams {
    Vec x0;
    std::vector<Vec> path;
    double t0 = 1.0;
    std::vector<double> epsilon_list;
    double r = 1.0;
};

struct TargetSpec {
    std::optional<double> scale;  // centred copy of the enclosing box with halfwidths scaled by this
    std::vector<AxisBox> boxes;
};

struct HitParams {
    Vec x0;
    BoxSpec enclosing;
    std::vector<TargetSpec> targets;
};

struct HarmonicParams {
    PayoffSpec payoff;
    BoxSpec domain;
    int points_per_axis = 5;
    double fill = 0.8;
    std::vector<Vec> points;  // overrides the grid when nonempty
};

struct HolderParams {
    HarmonicParams harmonic;
    HolderOptions options;
};

struct OscillationParams {
    Vec x0;
    PayoffSpec payoff;
    BoxSpec domain;
    double rho = 0.6;
    int k_max = 4;
    int points_per_axis = 3;
    double fill = 0.9;
};

struct LevySystemParams {
    Vec x0;
    BoxSpec from;
    std::vector<AxisBox> to;
    double t = 0.5;
};

struct DynkinParams {
    Vec x0;
    PayoffSpec test_function;
    std::vector<double> t_list;
    QuadratureConfig quadrature;
};

struct SelftestParams {
    std::vector<double> gammas;
    std::vector<double> xis;
    std::size_t n_samples = 1000000;
};

using ExperimentParams =
    std::variant<ExitTimeParams, JumpExitParams, TargetedJumpParams, TubeParams, HitParams, HarmonicParams,
                 HolderParams, OscillationParams, LevySystemParams, DynkinParams, SelftestParams>;

struct ExperimentConfig {
    Experiment experiment = Experiment::exit_time;
    std::uint64_t seed = 0;
    std::optional<StableIndexSet> indices;
    CoefficientPreset coefficients;
    Sampling sampling;
    ExperimentParams params;
    nlohmann::json resolved;  // every key read, with defaults filled in

    [[nodiscard]] EnsembleSpec ensemble(unsigned threads) const;
};

struct ParseResult {
    std::optional<ExperimentConfig> config;  // present iff diagnostics is empty
    std::vector<Diagnostic> diagnostics;
};

[[nodiscard]] ParseResult parse_config_text(const std::string& text);

/// Reads and parses a config file; an unreadable file becomes a diagnostic.
[[nodiscard]] ParseResult load_config(const std::filesystem::path& path);

} // namespace anisolab::cli
