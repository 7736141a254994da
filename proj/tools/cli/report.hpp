#pragma once

#include "cli/experiments.hpp"

#include <ostream>
#include <string_view>

namespace anisolab::cli {

inline constexpr std::string_view csv_header =
    "experiment,param_name,param_value,estimate,std_error,ci95_lo,ci95_hi,n_samples,censored_fraction,seed,wall_time_s";

/// One header line, then one line per row. Fields containing a comma or quote are quoted.
void write_csv(std::ostream& out, std::string_view experiment, const std::vector<ResultRow>& rows);

/// Sidecar with the resolved configuration, derived settings, flags and output paths.
[[nodiscard]] nlohmann::json sidecar_json(const ExperimentConfig& config, const ExperimentResult& result,
                                          unsigned threads, const nlohmann::json& outputs);

} // namespace anisolab::cli
