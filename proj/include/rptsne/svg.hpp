#pragma once

#include <string>
#include <vector>

#include "rptsne/common.hpp"
#include "rptsne/evaluation.hpp"

namespace rptsne {

// Figure geometry shared by the emitters and their tests. Ratio curves:
//   x(v) = margin_left + (log_b(v) - log_b(v_min)) /
//          (log_b(v_max) - log_b(v_min)) * plot_width      (mid-plot when
//          v_max == v_min)
//   y(r) = margin_top + (1 - r / y_max) * plot_height
// with y_max = 1.05 * max(1, largest ratio). Coordinates are printed
// with two decimals.
struct FigureGeometry {
    double width = 640.0;
    double height = 480.0;
    double margin_left = 60.0;
    double margin_right = 20.0;
    double margin_top = 20.0;
    double margin_bottom = 50.0;
    double plot_width() const { return width - margin_left - margin_right; }
    double plot_height() const { return height - margin_top - margin_bottom; }
};

// Two polylines on a log_{log_base} x axis: time ratio in green,
// accuracy ratio in red, with a dashed reference line at ratio 1.
std::string ratio_curves_svg(const std::vector<RatioRow>& table, double log_base);

// One circle per embedding point, fill color keyed by label modulo a
// fixed 10-color palette. Frame autoscaled to the data box plus 5%,
// falling back to a unit box for degenerate extents.
std::string scatter_svg(const Matrix& y, const LabelVector& labels);

}  // namespace rptsne
