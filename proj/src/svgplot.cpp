#include "nfisac/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "nfisac/csvio.hpp"

namespace nfisac {

namespace {

constexpr double kWidth = 860.0, kHeight = 540.0;
constexpr double kLeft = 72.0, kRight = 660.0, kTop = 46.0, kBottom = 488.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#e377c2",
                          "#7f7f7f", "#bcbd22"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '&') out += "&amp;";
        else if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else out += c;
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    bool ok() const { return lo <= hi; }
    void pad() {
        if (lo == hi) {
            const double d = std::abs(lo) > 0 ? 0.1 * std::abs(lo) : 1.0;
            lo -= d;
            hi += d;
        }
    }
};

double nice_step(double span) {
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double r = raw / mag;
    if (r < 1.5) return mag;
    if (r < 3.5) return 2.0 * mag;
    if (r < 7.5) return 5.0 * mag;
    return 10.0 * mag;
}

}  // namespace

std::string render_svg(const PlotSpec& spec) {
    Range xr, yr;
    for (const PlotSeries& s : spec.series) {
        if (s.x.size() != s.y.size())
            throw std::invalid_argument("render_svg: series x/y length mismatch");
        for (size_t i = 0; i < s.x.size(); ++i) {
            const double y = s.y[i];
            if (!std::isfinite(s.x[i]) || !std::isfinite(y)) continue;
            if (spec.log_y && !(y > 0.0)) continue;
            xr.add(s.x[i]);
            yr.add(spec.log_y ? std::log10(y) : y);
        }
    }
    if (!xr.ok()) {
        xr = {0.0, 1.0};
        yr = {0.0, 1.0};
    }
    xr.pad();
    yr.pad();

    const auto tx = [&](double v) {
        return kLeft + (v - xr.lo) / (xr.hi - xr.lo) * (kRight - kLeft);
    };
    const auto ty = [&](double v) {
        const double t = spec.log_y ? std::log10(v) : v;
        return kBottom - (t - yr.lo) / (yr.hi - yr.lo) * (kBottom - kTop);
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) +
           "\" height=\"" + num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " +
           num(kHeight) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + num(0.5 * (kLeft + kRight)) +
           "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
           escape(spec.title) + "</text>\n";

    // gridlines and tick labels
    const double xstep = nice_step(xr.hi - xr.lo);
    for (double v = std::ceil(xr.lo / xstep) * xstep; v <= xr.hi + 1e-9 * xstep; v += xstep) {
        const double px = tx(v);
        svg += "<line x1=\"" + num(px) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(px) +
               "\" y2=\"" + num(kBottom) + "\" stroke=\"#e0e0e0\"/>\n";
        svg += "<text x=\"" + num(px) + "\" y=\"" + num(kBottom + 18) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
               num(v) + "</text>\n";
    }
    if (spec.log_y) {
        for (double e = std::ceil(yr.lo); e <= yr.hi + 1e-9; e += 1.0) {
            const double py = kBottom - (e - yr.lo) / (yr.hi - yr.lo) * (kBottom - kTop);
            svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(py) + "\" x2=\"" + num(kRight) +
                   "\" y2=\"" + num(py) + "\" stroke=\"#e0e0e0\"/>\n";
            svg += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(py + 4) +
                   "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">1e" +
                   num(e) + "</text>\n";
        }
    } else {
        const double ystep = nice_step(yr.hi - yr.lo);
        for (double v = std::ceil(yr.lo / ystep) * ystep; v <= yr.hi + 1e-9 * ystep; v += ystep) {
            const double py = ty(v);
            svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(py) + "\" x2=\"" + num(kRight) +
                   "\" y2=\"" + num(py) + "\" stroke=\"#e0e0e0\"/>\n";
            svg += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(py + 4) +
                   "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" +
                   num(v) + "</text>\n";
        }
    }

    svg += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" +
           num(kRight - kLeft) + "\" height=\"" + num(kBottom - kTop) +
           "\" fill=\"none\" stroke=\"#404040\"/>\n";
    svg += "<text x=\"" + num(0.5 * (kLeft + kRight)) + "\" y=\"" + num(kHeight - 12) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
           escape(spec.x_label) + "</text>\n";
    svg += "<text x=\"20\" y=\"" + num(0.5 * (kTop + kBottom)) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "transform=\"rotate(-90 20 " +
           num(0.5 * (kTop + kBottom)) + ")\">" + escape(spec.y_label) + "</text>\n";

    for (size_t si = 0; si < spec.series.size(); ++si) {
        const PlotSeries& s = spec.series[si];
        const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
        std::string points;
        const auto flush = [&]() {
            if (!points.empty()) {
                svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
                       "\" stroke-width=\"1.8\" points=\"" + points + "\"/>\n";
                points.clear();
            }
        };
        for (size_t i = 0; i < s.x.size(); ++i) {
            const double y = s.y[i];
            const bool usable =
                std::isfinite(s.x[i]) && std::isfinite(y) && (!spec.log_y || y > 0.0);
            if (!usable) {
                flush();  // gap
                continue;
            }
            points += num(tx(s.x[i])) + "," + num(ty(y)) + " ";
            svg += "<circle cx=\"" + num(tx(s.x[i])) + "\" cy=\"" + num(ty(y)) +
                   "\" r=\"2.4\" fill=\"" + color + "\"/>\n";
        }
        flush();

        const double ly = kTop + 8.0 + 18.0 * static_cast<double>(si);
        svg += "<rect x=\"" + num(kRight + 12) + "\" y=\"" + num(ly - 8) +
               "\" width=\"14\" height=\"4\" fill=\"" + color + "\"/>\n";
        svg += "<text x=\"" + num(kRight + 32) + "\" y=\"" + num(ly) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + escape(s.label) +
               "</text>\n";
    }

    svg += "</svg>\n";
    return svg;
}

void write_svg(const std::string& path, const PlotSpec& spec) {
    write_text_file(path, render_svg(spec));
}

}  // namespace nfisac
