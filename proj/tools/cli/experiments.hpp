#pragma once

#include "cli/config.hpp"

#include <string>
#include <vector>

namespace anisolab::cli {

struct ResultRow {
    std::string param_name;
    std::string param_value;
    EstimateReport report;
};

struct PlotSeries {
    std::string label;
    std::vector<double> x, y, lo, hi;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    std::vector<PlotSeries> series;
};

struct ExperimentResult {
    std::vector<ResultRow> rows;
    std::vector<std::string> flags;
    nlohmann::json derived = nlohmann::json::object();  // settings computed from the config
    PlotSpec plot;
};

/// Runs the configured experiment. Estimates depend only on the config (including its
/// seed), never on `threads`.
[[nodiscard]] ExperimentResult run_experiment(const ExperimentConfig& config, unsigned threads);

/// Shortest round-trip decimal form used for every number written to reports.
[[nodiscard]] std::string format_number(double v);

} // namespace anisolab::cli
