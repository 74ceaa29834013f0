#pragma once

// Minimal vector plots (line and scatter) for the experiment outputs.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace wiener::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool scatter = false;
};

struct PlotOptions {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    bool log_y = false;
    bool equal_axes = false;
    bool unit_circle = false;
};

namespace detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

constexpr const char* palette[] = {"#1f77b4", "#d62728", "#ff7f0e", "#9467bd", "#2ca02c", "#8c564b"};

}  // namespace detail

inline std::string render(const std::vector<Series>& series, const PlotOptions& opt) {
    constexpr double width = 640, height = 420, left = 70, right = 20, top = 40, bottom = 50;
    auto ty = [&](double v) { return opt.log_y ? std::log10(std::max(v, 1e-300)) : v; };
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(ty(s.y[i]))) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, ty(s.y[i]));
            y1 = std::max(y1, ty(s.y[i]));
        }
    if (opt.unit_circle) {
        x0 = std::min(x0, -1.1), x1 = std::max(x1, 1.1);
        y0 = std::min(y0, -1.1), y1 = std::max(y1, 1.1);
    }
    if (!(x0 < x1)) x0 -= 1, x1 += 1;
    if (!(y0 < y1)) y0 -= 1, y1 += 1;
    const double pw = width - left - right, ph = height - top - bottom;
    if (opt.equal_axes) {
        const double span = std::max(x1 - x0, y1 - y0);
        const double cx = (x0 + x1) / 2, cy = (y0 + y1) / 2;
        x0 = cx - span / 2, x1 = cx + span / 2, y0 = cy - span / 2, y1 = cy + span / 2;
    }
    auto px = [&](double v) { return left + (v - x0) / (x1 - x0) * pw; };
    auto py = [&](double v) { return top + (1.0 - (ty(v) - y0) / (y1 - y0)) * ph; };
    auto pyr = [&](double t) { return top + (1.0 - (t - y0) / (y1 - y0)) * ph; };

    using detail::num;
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" + num(height) +
                    "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(width / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
         detail::escape(opt.title) + "</text>\n";
    s += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(height - 12) + "\" text-anchor=\"middle\">" +
         detail::escape(opt.xlabel) + "</text>\n";
    s += "<text x=\"16\" y=\"" + num(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         num(top + ph / 2) + ")\">" + detail::escape(opt.ylabel) + "</text>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
        s += "<text x=\"" + num(px(xv)) + "\" y=\"" + num(top + ph + 16) + "\" text-anchor=\"middle\">" + num(xv) +
             "</text>\n";
        const std::string lab = opt.log_y ? "1e" + num(std::round(yv * 10) / 10) : num(yv);
        s += "<text x=\"" + num(left - 6) + "\" y=\"" + num(pyr(yv) + 4) + "\" text-anchor=\"end\">" + lab +
             "</text>\n";
    }
    if (opt.unit_circle) {
        s += "<ellipse cx=\"" + num(px(0)) + "\" cy=\"" + num(pyr(0)) + "\" rx=\"" + num(px(1) - px(0)) + "\" ry=\"" +
             num(pyr(0) - pyr(1)) + "\" fill=\"none\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
    }
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& ser = series[k];
        const char* color = detail::palette[k % std::size(detail::palette)];
        if (ser.scatter) {
            for (std::size_t i = 0; i < ser.x.size(); ++i)
                s += "<circle cx=\"" + num(px(ser.x[i])) + "\" cy=\"" + num(py(ser.y[i])) + "\" r=\"2.5\" fill=\"" +
                     color + "\"/>\n";
        } else {
            s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < ser.x.size(); ++i)
                s += (i ? " " : "") + num(px(ser.x[i])) + "," + num(py(ser.y[i]));
            s += "\"/>\n";
        }
        s += "<text x=\"" + num(left + pw - 8) + "\" y=\"" + num(top + 16 + 14 * static_cast<double>(k)) +
             "\" text-anchor=\"end\" fill=\"" + color + "\">" + detail::escape(ser.label) + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

}  // namespace wiener::svg
