#ifndef PFMA_SVG_HPP
#define PFMA_SVG_HPP

// Minimal deterministic SVG line-chart writer for sweep results. No
// timestamps, no randomness: identical data gives identical bytes.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pfma {

struct SvgSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;  // (x, y)
};

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline const char* svg_color(std::size_t i) {
    static constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                              "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
    return palette[i % (sizeof palette / sizeof palette[0])];
}

}  // namespace detail

/// Write an SVG line chart: one polyline + legend entry per series, 5 ticks
/// per axis. Throws std::runtime_error with the path on I/O failure.
inline void write_svg_chart(const std::string& path, const std::string& x_label,
                            const std::string& y_label, const std::vector<SvgSeries>& series) {
    if (series.empty()) throw std::invalid_argument("write_svg_chart: no series");
    double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
    bool first = true;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) {
            if (first) {
                xmin = xmax = x;
                ymin = ymax = y;
                first = false;
            }
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (first) throw std::invalid_argument("write_svg_chart: no points");
    if (xmax - xmin < 1e-12) {
        xmin -= 1.0;
        xmax += 1.0;
    }
    if (ymax - ymin < 1e-12) {
        ymin -= 1.0;
        ymax += 1.0;
    }

    constexpr double width = 860, height = 560;
    constexpr double ml = 80, mr = 190, mt = 30, mb = 60;
    const double pw = width - ml - mr, ph = height - mt - mb;
    auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };

    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    using detail::svg_num;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    os << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    // axes
    os << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
       << mt + ph << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
       << "\" stroke=\"black\"/>\n";
    constexpr int nticks = 5;
    for (int i = 0; i < nticks; ++i) {
        const double fx = xmin + (xmax - xmin) * i / (nticks - 1);
        const double fy = ymin + (ymax - ymin) * i / (nticks - 1);
        os << "<line x1=\"" << svg_num(sx(fx)) << "\" y1=\"" << mt + ph << "\" x2=\""
           << svg_num(sx(fx)) << "\" y2=\"" << mt + ph + 6 << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << svg_num(sx(fx)) << "\" y=\"" << mt + ph + 22
           << "\" font-size=\"12\" text-anchor=\"middle\">" << svg_num(fx) << "</text>\n";
        os << "<line x1=\"" << ml - 6 << "\" y1=\"" << svg_num(sy(fy)) << "\" x2=\"" << ml
           << "\" y2=\"" << svg_num(sy(fy)) << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << ml - 10 << "\" y=\"" << svg_num(sy(fy) + 4)
           << "\" font-size=\"12\" text-anchor=\"end\">" << svg_num(fy) << "</text>\n";
    }
    os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 15
       << "\" font-size=\"14\" text-anchor=\"middle\">" << x_label << "</text>\n";
    os << "<text x=\"20\" y=\"" << mt + ph / 2
       << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 20 " << mt + ph / 2
       << ")\">" << y_label << "</text>\n";
    // series
    for (std::size_t i = 0; i < series.size(); ++i) {
        const char* color = detail::svg_color(i);
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
        for (const auto& [x, y] : series[i].points)
            os << svg_num(sx(x)) << "," << svg_num(sy(y)) << " ";
        os << "\"/>\n";
        for (const auto& [x, y] : series[i].points)
            os << "<circle cx=\"" << svg_num(sx(x)) << "\" cy=\"" << svg_num(sy(y))
               << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
        const double ly = mt + 16 + 20 * static_cast<double>(i);
        os << "<line x1=\"" << ml + pw + 14 << "\" y1=\"" << svg_num(ly - 4) << "\" x2=\""
           << ml + pw + 44 << "\" y2=\"" << svg_num(ly - 4) << "\" stroke=\"" << color
           << "\" stroke-width=\"1.8\"/>\n";
        os << "<text x=\"" << ml + pw + 50 << "\" y=\"" << svg_num(ly)
           << "\" font-size=\"13\">" << series[i].label << "</text>\n";
    }
    os << "</svg>\n";
    if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace pfma

#endif  // PFMA_SVG_HPP
