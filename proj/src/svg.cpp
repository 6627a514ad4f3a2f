#include "rptsne/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace rptsne {

namespace {

const char* kPalette[10] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace

std::string ratio_curves_svg(const std::vector<RatioRow>& table, double log_base) {
    if (table.empty()) throw UsageError("ratio_curves_svg: empty table");
    if (!(log_base > 1.0)) throw UsageError("ratio_curves_svg: log base must exceed 1");
    const FigureGeometry g;

    const double lb = std::log(log_base);
    const double xs_min = std::log(static_cast<double>(table.front().d_prime)) / lb;
    const double xs_max = std::log(static_cast<double>(table.back().d_prime)) / lb;
    double y_max = 1.0;
    for (const RatioRow& r : table) {
        y_max = std::max({y_max, r.time_ratio, r.accuracy_ratio});
    }
    y_max *= 1.05;

    auto xpos = [&](std::size_t d_prime) {
        if (xs_max == xs_min) return g.margin_left + 0.5 * g.plot_width();
        const double xs = std::log(static_cast<double>(d_prime)) / lb;
        return g.margin_left + (xs - xs_min) / (xs_max - xs_min) * g.plot_width();
    };
    auto ypos = [&](double ratio) { return g.margin_top + (1.0 - ratio / y_max) * g.plot_height(); };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << g.width << "\" height=\""
        << g.height << "\" viewBox=\"0 0 " << g.width << " " << g.height << "\">\n"
        << "<rect width=\"" << g.width << "\" height=\"" << g.height << "\" fill=\"white\"/>\n";

    // axes
    const double x0 = g.margin_left;
    const double x1 = g.width - g.margin_right;
    const double y0 = g.margin_top;
    const double y1 = g.height - g.margin_bottom;
    svg << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(x1)
        << "\" y2=\"" << fmt(y1) << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(x0)
        << "\" y2=\"" << fmt(y1) << "\" stroke=\"black\"/>\n";

    // reference line at ratio 1
    svg << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(ypos(1.0)) << "\" x2=\"" << fmt(x1)
        << "\" y2=\"" << fmt(ypos(1.0))
        << "\" stroke=\"#999999\" stroke-dasharray=\"4 3\"/>\n";

    // x ticks labeled with the raw dimension
    for (const RatioRow& r : table) {
        const double x = xpos(r.d_prime);
        svg << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(x)
            << "\" y2=\"" << fmt(y1 + 5.0) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y1 + 18.0)
            << "\" font-size=\"10\" text-anchor=\"middle\">" << r.d_prime << "</text>\n";
    }
    for (int t = 0; t <= 4; ++t) {
        const double ratio = y_max * t / 4.0;
        svg << "<text x=\"" << fmt(x0 - 8.0) << "\" y=\"" << fmt(ypos(ratio) + 3.0)
            << "\" font-size=\"10\" text-anchor=\"end\">" << fmt(ratio) << "</text>\n";
    }
    svg << "<text x=\"" << fmt((x0 + x1) / 2.0) << "\" y=\"" << fmt(g.height - 12.0)
        << "\" font-size=\"12\" text-anchor=\"middle\">projected dimension (log base "
        << log_base << ")</text>\n";
    svg << "<text x=\"14\" y=\"" << fmt((y0 + y1) / 2.0)
        << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
        << fmt((y0 + y1) / 2.0) << ")\">ratio vs baseline</text>\n";

    auto polyline = [&](const char* color, auto value) {
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (const RatioRow& r : table) {
            if (!first) svg << ' ';
            first = false;
            svg << fmt(xpos(r.d_prime)) << ',' << fmt(ypos(value(r)));
        }
        svg << "\"/>\n";
    };
    polyline("#2ca02c", [](const RatioRow& r) { return r.time_ratio; });
    polyline("#d62728", [](const RatioRow& r) { return r.accuracy_ratio; });

    svg << "<text x=\"" << fmt(x1 - 150.0) << "\" y=\"" << fmt(y0 + 14.0)
        << "\" font-size=\"11\" fill=\"#2ca02c\">time ratio</text>\n";
    svg << "<text x=\"" << fmt(x1 - 150.0) << "\" y=\"" << fmt(y0 + 28.0)
        << "\" font-size=\"11\" fill=\"#d62728\">accuracy ratio</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

std::string scatter_svg(const Matrix& y, const LabelVector& labels) {
    if (labels.size() != y.rows) throw UsageError("scatter_svg: labels/rows mismatch");
    if (y.cols != 2) throw UsageError("scatter_svg: embedding must be 2-D");
    const double side = 640.0;
    const double margin = 20.0;

    double min_x = y.at(0, 0), max_x = y.at(0, 0);
    double min_y = y.at(0, 1), max_y = y.at(0, 1);
    for (std::size_t i = 1; i < y.rows; ++i) {
        min_x = std::min(min_x, y.at(i, 0));
        max_x = std::max(max_x, y.at(i, 0));
        min_y = std::min(min_y, y.at(i, 1));
        max_y = std::max(max_y, y.at(i, 1));
    }
    auto pad = [](double& lo, double& hi) {
        const double extent = hi - lo;
        if (extent <= 0.0) {  // degenerate box: fall back to a unit box
            lo -= 0.5;
            hi += 0.5;
        } else {
            lo -= 0.05 * extent;
            hi += 0.05 * extent;
        }
    };
    pad(min_x, max_x);
    pad(min_y, max_y);

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << side << "\" height=\"" << side
        << "\" viewBox=\"0 0 " << side << " " << side << "\">\n"
        << "<rect width=\"" << side << "\" height=\"" << side << "\" fill=\"white\"/>\n";
    const double span = side - 2.0 * margin;
    for (std::size_t i = 0; i < y.rows; ++i) {
        const double cx = margin + (y.at(i, 0) - min_x) / (max_x - min_x) * span;
        const double cy = margin + (1.0 - (y.at(i, 1) - min_y) / (max_y - min_y)) * span;
        const auto color_index =
            static_cast<std::size_t>(((labels[i] % 10) + 10) % 10);
        svg << "<circle cx=\"" << fmt(cx) << "\" cy=\"" << fmt(cy) << "\" r=\"2\" fill=\""
            << kPalette[color_index] << "\"/>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace rptsne
