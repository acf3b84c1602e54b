#ifndef MRF_PLOT_HPP
#define MRF_PLOT_HPP

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "mrf/common.hpp"
#include "mrf/grid.hpp"

namespace mrf {

// Deterministic SVG output: fixed 800x600 canvas, fixed color ramp,
// data-driven axes, %.6g coordinates.

namespace svg {

inline constexpr double kW = 800.0, kH = 600.0;
inline constexpr double kMargin = 60.0;

inline const std::vector<std::string>& ramp() {
    static const std::vector<std::string> colors = {"#440154", "#46327e", "#365c8d", "#277f8e",
                                                    "#1fa187", "#4ac16d", "#a0da39", "#fde725"};
    return colors;
}

struct Axes {
    double x0, x1, y0, y1;

    double px(double x) const { return kMargin + (x - x0) / (x1 - x0) * (kW - 2 * kMargin); }
    double py(double y) const { return kH - kMargin - (y - y0) / (y1 - y0) * (kH - 2 * kMargin); }
};

inline std::string header() {
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    return o.str();
}

inline std::string axes_frame(const Axes& a, const std::string& title) {
    std::ostringstream o;
    o << "<rect x=\"" << fmt_g6(kMargin) << "\" y=\"" << fmt_g6(kMargin) << "\" width=\""
      << fmt_g6(kW - 2 * kMargin) << "\" height=\"" << fmt_g6(kH - 2 * kMargin)
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    o << "<text x=\"" << fmt_g6(kW / 2) << "\" y=\"30\" text-anchor=\"middle\" font-size=\"16\">"
      << title << "</text>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = a.x0 + (a.x1 - a.x0) * i / 4.0;
        const double fy = a.y0 + (a.y1 - a.y0) * i / 4.0;
        o << "<text x=\"" << fmt_g6(a.px(fx)) << "\" y=\"" << fmt_g6(kH - kMargin + 20)
          << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt_g6(fx) << "</text>\n";
        o << "<text x=\"" << fmt_g6(kMargin - 8) << "\" y=\"" << fmt_g6(a.py(fy) + 4)
          << "\" text-anchor=\"end\" font-size=\"11\">" << fmt_g6(fy) << "</text>\n";
    }
    return o.str();
}

inline std::string polyline(const Axes& a, const std::vector<std::pair<double, double>>& pts,
                            const std::string& color, double width = 1.5) {
    if (pts.empty()) return "";
    std::ostringstream o;
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << fmt_g6(width)
      << "\" points=\"";
    for (const auto& [x, y] : pts) o << fmt_g6(a.px(x)) << "," << fmt_g6(a.py(y)) << " ";
    o << "\"/>\n";
    return o.str();
}

inline std::string marker(const Axes& a, double x, double y, const std::string& color,
                          double r = 3.5) {
    std::ostringstream o;
    o << "<circle cx=\"" << fmt_g6(a.px(x)) << "\" cy=\"" << fmt_g6(a.py(y)) << "\" r=\""
      << fmt_g6(r) << "\" fill=\"" << color << "\"/>\n";
    return o.str();
}

inline std::string band_x(const Axes& a, double xa, double xb, const std::string& color) {
    std::ostringstream o;
    o << "<rect x=\"" << fmt_g6(a.px(xa)) << "\" y=\"" << fmt_g6(kMargin) << "\" width=\""
      << fmt_g6(a.px(xb) - a.px(xa)) << "\" height=\"" << fmt_g6(kH - 2 * kMargin)
      << "\" fill=\"" << color << "\" opacity=\"0.25\"/>\n";
    return o.str();
}

}  // namespace svg

// 1D field as a curve with the target band shaded; optional overlays are
// (state, value) traces with markers at given states.
struct CurveOverlay {
    std::vector<std::pair<double, double>> points;
    std::vector<std::pair<double, double>> markers;
    std::string color = "#d62728";
};

inline std::string plot_field_1d(const GridField& f, double band_lo, double band_hi,
                                 const std::string& title,
                                 const std::vector<CurveOverlay>& overlays = {}) {
    std::vector<std::pair<double, double>> pts;
    double ymin = kInf, ymax = -kInf;
    for (std::size_t i = 0; i < f.node_count(); ++i) {
        const double x = f.node_coords(i)[0];
        const double v = f.value_at(i);
        pts.emplace_back(x, v);
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
    }
    if (!(ymax > ymin)) ymax = ymin + 1.0;
    svg::Axes a{f.box().lo[0], f.box().hi[0], ymin, ymax + 0.05 * (ymax - ymin)};
    std::ostringstream o;
    o << svg::header();
    o << svg::band_x(a, std::max(band_lo, a.x0), std::min(band_hi, a.x1), "#888888");
    o << svg::axes_frame(a, title);
    o << svg::polyline(a, pts, "#1f77b4", 2.0);
    for (const auto& ov : overlays) {
        o << svg::polyline(a, ov.points, ov.color, 1.2);
        for (const auto& [x, y] : ov.markers) o << svg::marker(a, x, y, ov.color);
    }
    o << "</svg>\n";
    return o.str();
}

// 2D field as filled quantile bands (cells colored by the bin of their mean),
// with optional overlay polylines in state space.
struct PathOverlay {
    std::vector<std::pair<double, double>> points;
    std::vector<std::pair<double, double>> markers;
    std::string color = "#d62728";
};

inline std::string plot_field_2d(const GridField& f, const std::string& title,
                                 const std::vector<PathOverlay>& overlays = {}) {
    if (f.dim() != 2) throw PreconditionError("plot_field_2d: need a 2d field");
    // quantile levels over non-masked finite values
    std::vector<double> vals;
    for (std::size_t i = 0; i < f.node_count(); ++i)
        if (std::isfinite(f.value_at(i))) vals.push_back(f.value_at(i));
    std::sort(vals.begin(), vals.end());
    const auto& colors = svg::ramp();
    auto bin_of = [&](double v) {
        const auto it = std::lower_bound(vals.begin(), vals.end(), v);
        const double q = static_cast<double>(it - vals.begin()) / static_cast<double>(vals.size());
        std::size_t b = static_cast<std::size_t>(q * static_cast<double>(colors.size()));
        return std::min(b, colors.size() - 1);
    };

    svg::Axes a{f.box().lo[0], f.box().hi[0], f.box().lo[1], f.box().hi[1]};
    const auto res = f.resolution();
    std::ostringstream o;
    o << svg::header();
    for (std::size_t i = 0; i + 1 < res[0]; ++i) {
        for (std::size_t j = 0; j + 1 < res[1]; ++j) {
            double mean = 0.0;
            for (std::size_t di = 0; di <= 1; ++di)
                for (std::size_t dj = 0; dj <= 1; ++dj)
                    mean += f.value_at(f.flat_index({i + di, j + dj}));
            mean *= 0.25;
            const Vec c0 = f.node_coords(f.flat_index({i, j}));
            const Vec c1 = f.node_coords(f.flat_index({i + 1, j + 1}));
            o << "<rect x=\"" << fmt_g6(a.px(c0[0])) << "\" y=\"" << fmt_g6(a.py(c1[1]))
              << "\" width=\"" << fmt_g6(a.px(c1[0]) - a.px(c0[0])) << "\" height=\""
              << fmt_g6(a.py(c0[1]) - a.py(c1[1])) << "\" fill=\"" << colors[bin_of(mean)]
              << "\"/>\n";
        }
    }
    o << svg::axes_frame(a, title);
    for (const auto& ov : overlays) {
        o << svg::polyline(a, ov.points, ov.color, 1.5);
        for (const auto& [x, y] : ov.markers) o << svg::marker(a, x, y, ov.color);
    }
    o << "</svg>\n";
    return o.str();
}

// Scatter of per-start accumulated cost against the certified bound curve.
inline std::string plot_cost_vs_bound(const std::vector<std::pair<double, double>>& cost_points,
                                      const std::vector<std::pair<double, double>>& bound_curve,
                                      const std::string& title) {
    double xmax = 1e-9, ymax = 1e-9;
    for (const auto& [x, y] : cost_points) {
        xmax = std::max(xmax, x);
        ymax = std::max(ymax, y);
    }
    for (const auto& [x, y] : bound_curve) {
        xmax = std::max(xmax, x);
        ymax = std::max(ymax, y);
    }
    svg::Axes a{0.0, 1.05 * xmax, 0.0, 1.1 * ymax};
    std::ostringstream o;
    o << svg::header() << svg::axes_frame(a, title);
    o << svg::polyline(a, bound_curve, "#2ca02c", 2.0);
    for (const auto& [x, y] : cost_points) o << svg::marker(a, x, y, "#1f77b4", 3.0);
    o << "</svg>\n";
    return o.str();
}

// Histogram bars over fixed residual bins.
inline std::string plot_histogram(const std::vector<double>& residuals,
                                  const std::vector<double>& edges, const std::string& title) {
    std::vector<std::size_t> counts(edges.size() - 1, 0);
    for (double r : residuals)
        for (std::size_t b = 0; b + 1 < edges.size(); ++b)
            if (r > edges[b] && r <= edges[b + 1]) {
                ++counts[b];
                break;
            }
    std::size_t cmax = 1;
    for (auto c : counts) cmax = std::max(cmax, c);
    svg::Axes a{0.0, static_cast<double>(counts.size()), 0.0, static_cast<double>(cmax) * 1.1};
    std::ostringstream o;
    o << svg::header() << svg::axes_frame(a, title);
    for (std::size_t b = 0; b < counts.size(); ++b) {
        if (counts[b] == 0) continue;
        o << "<rect x=\"" << fmt_g6(a.px(static_cast<double>(b) + 0.1)) << "\" y=\""
          << fmt_g6(a.py(static_cast<double>(counts[b]))) << "\" width=\""
          << fmt_g6(a.px(0.8) - a.px(0.0)) << "\" height=\""
          << fmt_g6(a.py(0.0) - a.py(static_cast<double>(counts[b]))) << "\" fill=\"#1f77b4\"/>\n";
        o << "<text x=\"" << fmt_g6(a.px(static_cast<double>(b) + 0.5)) << "\" y=\""
          << fmt_g6(svg::kH - svg::kMargin + 34) << "\" text-anchor=\"middle\" font-size=\"9\">"
          << fmt_g6(edges[b + 1]) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace mrf

#endif
