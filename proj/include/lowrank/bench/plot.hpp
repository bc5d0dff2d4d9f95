#pragma once

#include <string>
#include <vector>

#include "lowrank/bench/results.hpp"

namespace lowrank::bench {

enum class PlotKind { power_curve, phase_diagram, diameter_bars };

std::string_view to_string(PlotKind kind);

/// Self-contained SVG with axes, error bars from std_error and a caption.
/// power_curve takes "power" rows (x = rho), phase_diagram "size"/"power"
/// rows (x = n), diameter_bars "median_diameter" rows (x = k).
std::string emit_plot(const std::vector<ResultRow>& rows, PlotKind kind);

}  // namespace lowrank::bench
