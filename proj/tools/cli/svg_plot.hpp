#pragma once

#include "cli/experiments.hpp"

#include <string>

namespace anisolab::cli {

/// Static SVG line plot with 95% interval bars; log axes use decade ticks.
[[nodiscard]] std::string render_svg(const PlotSpec& plot);

} // namespace anisolab::cli
