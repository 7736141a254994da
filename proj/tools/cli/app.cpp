#include "cli/app.hpp"

#include "cli/config.hpp"
#include "cli/experiments.hpp"
#include "cli/report.hpp"
#include "cli/svg_plot.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

namespace anisolab::cli {

namespace fs = std::filesystem;

namespace {

void print_diagnostics(const std::vector<Diagnostic>& diags, const fs::path& file, std::ostream& err) {
    for (const auto& d : diags) err << file.string() << ": " << format_diagnostic(d) << '\n';
}

fs::path default_output_dir() {
    if (const char* env = std::getenv(output_dir_env); env != nullptr && *env != '\0') return env;
    return "results";
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

int validate_command(const fs::path& file, std::ostream& out, std::ostream& err) {
    const auto parsed = load_config(file);
    if (!parsed.diagnostics.empty()) {
        print_diagnostics(parsed.diagnostics, file, err);
        err << parsed.diagnostics.size() << " problem(s) found\n";
        return exit_config_error;
    }
    out << file.string() << ": ok (" << experiment_name(parsed.config->experiment) << ")\n";
    return exit_ok;
}

struct RunOptions {
    fs::path config;
    bool plot = false;
    unsigned threads = 1;
    std::optional<std::uint64_t> seed;
    std::optional<fs::path> out_dir;
};

int run_command(const RunOptions& options, std::ostream& out, std::ostream& err) {
    auto parsed = load_config(options.config);
    if (!parsed.diagnostics.empty()) {
        print_diagnostics(parsed.diagnostics, options.config, err);
        return exit_config_error;
    }
    auto config = std::move(*parsed.config);
    if (options.seed) {
        config.seed = *options.seed;
        config.resolved["seed"] = *options.seed;
    }
    const std::string experiment(experiment_name(config.experiment));

    ExperimentResult result;
    try {
        result = run_experiment(config, options.threads);
    } catch (const std::invalid_argument& e) {
        err << "configuration error in " << experiment << ": " << e.what() << '\n';
        return exit_config_error;
    } catch (const std::exception& e) {
        err << "runtime error in " << experiment << ": " << e.what() << '\n';
        return exit_runtime_error;
    }

    try {
        const fs::path dir = options.out_dir.value_or(default_output_dir());
        fs::create_directories(dir);
        const std::string stem = options.config.stem().string();
        const fs::path csv = dir / (stem + ".csv"), json = dir / (stem + ".json"), svg = dir / (stem + ".svg");

        std::ostringstream table;
        write_csv(table, experiment, result.rows);
        write_text(csv, table.str());
        nlohmann::json outputs = {{"csv", csv.string()}};
        if (options.plot) {
            write_text(svg, render_svg(result.plot));
            outputs["svg"] = svg.string();
        }
        write_text(json, sidecar_json(config, result, options.threads, outputs).dump(2) + "\n");

        for (const auto& flag : result.flags) err << "warning: " << flag << '\n';
        out << "wrote " << csv.string() << '\n' << "wrote " << json.string() << '\n';
        if (options.plot) out << "wrote " << svg.string() << '\n';
    } catch (const std::exception& e) {
        err << "runtime error while writing reports: " << e.what() << '\n';
        return exit_runtime_error;
    }
    return exit_ok;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Monte Carlo experiments for SDEs driven by anisotropic stable processes"};
    app.require_subcommand(1);

    RunOptions run;
    std::string run_config;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    std::uint64_t seed = 0;
    std::string out_dir;
    auto* run_cmd = app.add_subcommand("run", "run an experiment and write CSV, JSON and optional SVG reports");
    run_cmd->add_option("config", run_config, "experiment configuration (YAML)")->required();
    run_cmd->add_flag("--plot", run.plot, "also write an SVG plot");
    run_cmd->add_option("--threads", threads, "worker threads (never changes estimates)")->check(CLI::PositiveNumber);
    auto* seed_opt = run_cmd->add_option("--seed", seed, "override the configured seed");
    auto* out_opt = run_cmd->add_option("--out", out_dir, std::string("output directory (default: $") +
                                                              output_dir_env + " or ./results)");

    std::string validate_config;
    auto* validate_cmd = app.add_subcommand("validate", "check a configuration and report every problem");
    validate_cmd->add_option("config", validate_config, "experiment configuration (YAML)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return exit_ok;
        }
        err << e.what() << '\n' << app.help();
        return exit_config_error;
    }

    if (validate_cmd->parsed()) return validate_command(validate_config, out, err);
    run.config = run_config;
    run.threads = threads;
    if (seed_opt->count() > 0) run.seed = seed;
    if (out_opt->count() > 0) run.out_dir = fs::path(out_dir);
    (void)run_cmd;
    return run_command(run, out, err);
}

} // namespace anisolab::cli
