#include "cli/report.hpp"

namespace anisolab::cli {

namespace {

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + '"';
}

} // namespace

void write_csv(std::ostream& out, std::string_view experiment, const std::vector<ResultRow>& rows) {
    out << csv_header << '\n';
    for (const auto& row : rows) {
        const auto& r = row.report;
        out << csv_field(experiment) << ',' << csv_field(row.param_name) << ',' << csv_field(row.param_value) << ','
            << format_number(r.estimate) << ',' << format_number(r.std_error) << ',' << format_number(r.ci95_lo) << ','
            << format_number(r.ci95_hi) << ',' << r.n_samples << ',' << format_number(r.censored_fraction) << ','
            << r.seed << ',' << format_number(r.wall_time) << '\n';
    }
}

nlohmann::json sidecar_json(const ExperimentConfig& config, const ExperimentResult& result, unsigned threads,
                            const nlohmann::json& outputs) {
    nlohmann::json out;
    out["config"] = config.resolved;
    out["derived"] = result.derived;
    out["flags"] = result.flags;
    out["runtime"] = {{"threads", threads}};
    out["outputs"] = outputs;
    return out;
}

} // namespace anisolab::cli
