#ifndef LLE_SVG_PLOT_HPP
#define LLE_SVG_PLOT_HPP

#include "lle/types.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace lle::svg {

inline constexpr int panel_size = 800;

struct Panel {
    std::string title;
    Matrix points;                // n x 1 (strip plot) or n x >=2 (first two columns)
    std::optional<Vector> color;  // per-point scalar mapped onto the palette
};

namespace detail {

inline std::string fixed(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 2);
    return ec == std::errc{} ? std::string(buf, end) : std::string("0");
}

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

/// Linear blend through a fixed five-stop blue-to-yellow palette.
inline std::string palette(double t) {
    static constexpr std::array<std::array<int, 3>, 5> stops{{
        {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
    t = std::clamp(t, 0.0, 1.0) * 4.0;
    const int lo = std::min(3, static_cast<int>(t));
    const double f = t - lo;
    char buf[8];
    int rgb[3];
    for (int c = 0; c < 3; ++c) {
        rgb[c] = static_cast<int>(std::lround(stops[lo][c] + f * (stops[lo + 1][c] - stops[lo][c])));
    }
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    return buf;
}

inline std::pair<double, double> bounds(const Eigen::Ref<const Vector>& v) {
    double lo = v.minCoeff();
    double hi = v.maxCoeff();
    if (hi - lo <= 0.0) {
        lo -= 1.0;
        hi += 1.0;
    }
    return {lo, hi};
}

inline std::string render_panel(const Panel& panel, int x_offset) {
    constexpr double margin = 40.0;
    constexpr double span = panel_size - 2.0 * margin;
    const Index n = panel.points.rows();
    std::string out;
    out += "<g transform=\"translate(" + std::to_string(x_offset) + ",0)\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"800\" fill=\"white\" stroke=\"#cccccc\"/>\n";
    out += "<text x=\"400\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
           escape(panel.title) + "</text>\n";
    if (n == 0 || panel.points.cols() == 0) {
        return out + "</g>\n";
    }

    const auto [x_lo, x_hi] = bounds(panel.points.col(0));
    double y_lo = 0.0;
    double y_hi = 1.0;
    const bool strip = panel.points.cols() == 1;
    if (!strip) {
        std::tie(y_lo, y_hi) = bounds(panel.points.col(1));
    }
    std::optional<std::pair<double, double>> c_range;
    if (panel.color && panel.color->size() == n) {
        c_range = bounds(*panel.color);
    }

    for (Index i = 0; i < n; ++i) {
        const double px = margin + span * (panel.points(i, 0) - x_lo) / (x_hi - x_lo);
        // Strip plots spread points vertically by their color value (or index).
        double ty = 0.5;
        if (strip) {
            ty = c_range ? ((*panel.color)(i) - c_range->first) / (c_range->second - c_range->first)
                         : static_cast<double>(i) / static_cast<double>(std::max<Index>(1, n - 1));
        } else {
            ty = (panel.points(i, 1) - y_lo) / (y_hi - y_lo);
        }
        const double py = panel_size - margin - span * ty;
        const double t = c_range ? ((*panel.color)(i) - c_range->first) / (c_range->second - c_range->first)
                                 : static_cast<double>(i) / static_cast<double>(std::max<Index>(1, n - 1));
        out += "<circle cx=\"" + fixed(px) + "\" cy=\"" + fixed(py) + "\" r=\"3\" fill=\"" + palette(t) + "\"/>\n";
    }
    return out + "</g>\n";
}

} // namespace detail

/// SVG 1.1 document with the panels laid out left to right, 800x800 each.
inline std::string render(const std::vector<Panel>& panels) {
    const int width = panel_size * static_cast<int>(std::max<std::size_t>(1, panels.size()));
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + std::to_string(width) +
           "\" height=\"800\" viewBox=\"0 0 " + std::to_string(width) + " 800\">\n";
    for (std::size_t p = 0; p < panels.size(); ++p) {
        out += detail::render_panel(panels[p], static_cast<int>(p) * panel_size);
    }
    return out + "</svg>\n";
}

} // namespace lle::svg

#endif
