#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "csv.hpp"
#include "errors.hpp"

namespace opasym {

struct PlotSeries {
    std::string label;
    std::string color;
    std::vector<std::pair<double, double>> points;  // non-finite y breaks the line
    bool bars = false;                                // draw as a step histogram
};

/// Minimal line plot with a frame, min/max tick labels and a legend.
inline void write_svg_plot(const std::string& path, const std::string& title, const std::vector<PlotSeries>& series) {
    constexpr double W = 720, H = 440, L = 70, R = 20, Tm = 40, B = 50;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) {
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    if (!(x1 > x0)) throw error("plot has no finite data");
    if (!(y1 > y0)) y1 = y0 + 1.0;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - Tm - B); };

    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot write " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
    out << "<rect x=\"" << L << "\" y=\"" << Tm << "\" width=\"" << W - L - R << "\" height=\"" << H - Tm - B
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    if (y0 < 0 && y1 > 0)
        out << "<line x1=\"" << L << "\" x2=\"" << W - R << "\" y1=\"" << py(0) << "\" y2=\"" << py(0) << "\" stroke=\"#bbb\"/>\n";
    out << "<text x=\"" << L << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << format_double(x0) << "</text>\n";
    out << "<text x=\"" << W - R << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << format_double(x1) << "</text>\n";
    out << "<text x=\"" << L - 6 << "\" y=\"" << H - B << "\" text-anchor=\"end\">" << format_double(y0) << "</text>\n";
    out << "<text x=\"" << L - 6 << "\" y=\"" << Tm + 10 << "\" text-anchor=\"end\">" << format_double(y1) << "</text>\n";

    int legend = 0;
    for (const auto& s : series) {
        std::string d;
        bool pen = false;
        for (std::size_t i = 0; i < s.points.size(); ++i) {
            const auto [x, y] = s.points[i];
            if (!std::isfinite(y)) {
                pen = false;
                continue;
            }
            if (s.bars && i + 1 < s.points.size()) {
                const double xn = s.points[i + 1].first;
                d += (pen ? " L" : " M") + format_double(px(x)) + "," + format_double(py(y)) + " L" + format_double(px(xn)) + "," +
                     format_double(py(y));
            } else {
                d += (pen ? " L" : " M") + format_double(px(x)) + "," + format_double(py(y));
            }
            pen = true;
        }
        out << "<path d=\"" << d << "\" fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"/>\n";
        const double ly = Tm + 16 + 16 * legend++;
        out << "<line x1=\"" << W - R - 150 << "\" x2=\"" << W - R - 130 << "\" y1=\"" << ly - 4 << "\" y2=\"" << ly - 4 << "\" stroke=\""
            << s.color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << W - R - 125 << "\" y=\"" << ly << "\">" << s.label << "</text>\n";
    }
    out << "</svg>\n";
}

} // namespace opasym
