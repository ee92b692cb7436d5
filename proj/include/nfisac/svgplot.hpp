#ifndef NFISAC_SVGPLOT_HPP
#define NFISAC_SVGPLOT_HPP

#include <string>
#include <vector>

// Minimal SVG line charts for sweep outputs. NaN samples break the polyline,
// which is how infeasible points show up as gaps.

namespace nfisac {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;  // positive finite samples only; others are dropped
    std::vector<PlotSeries> series;
};

std::string render_svg(const PlotSpec& spec);
void write_svg(const std::string& path, const PlotSpec& spec);

}  // namespace nfisac

#endif
