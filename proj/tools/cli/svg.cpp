#include "cli/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <vector>

#include "cli/csv.hpp"

namespace xledger::cli {

namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 400;
constexpr double kLeft = 80;
constexpr double kRight = 150;
constexpr double kTop = 40;
constexpr double kBottom = 50;

std::string_view colour(Protocol p) {
    switch (p) {
        case Protocol::Xlpn22: return "#1b7837";
        case Protocol::Vldb20: return "#2166ac";
        case Protocol::Podc18: return "#b2182b";
    }
    return "#000000";
}

std::string fixed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

}  // namespace

std::string render_svg(std::string_view csv_text, std::string_view x_column, std::string_view title) {
    const auto rows = parse_csv(csv_text);
    std::map<Protocol, std::vector<std::pair<std::uint64_t, std::uint64_t>>> series;
    std::uint64_t x_min = UINT64_MAX, x_max = 0, y_max = 0;
    for (const auto& r : rows) {
        const auto x = column(r, x_column);
        series[r.protocol].emplace_back(x, r.sim_time_units);
        x_min = std::min(x_min, x);
        x_max = std::max(x_max, x);
        y_max = std::max(y_max, r.sim_time_units);
    }
    if (rows.empty()) x_min = 0;
    const double x_span = x_max > x_min ? static_cast<double>(x_max - x_min) : 1.0;
    const double y_span = y_max > 0 ? static_cast<double>(y_max) : 1.0;
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto px = [&](std::uint64_t x) { return kLeft + plot_w * static_cast<double>(x - x_min) / x_span; };
    auto py = [&](std::uint64_t y) { return kTop + plot_h * (1.0 - static_cast<double>(y) / y_span); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
    os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w << "\" y2=\""
       << kTop + plot_h << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + plot_h
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 10 << "\" text-anchor=\"middle\">" << x_column
       << "</text>\n";
    os << "<text x=\"15\" y=\"" << kTop + plot_h / 2 << "\" transform=\"rotate(-90 15 " << kTop + plot_h / 2
       << ")\" text-anchor=\"middle\">sim_time_units</text>\n";
    os << "<text x=\"" << kLeft - 5 << "\" y=\"" << kTop + 4 << "\" text-anchor=\"end\">" << y_max << "</text>\n";
    os << "<text x=\"" << kLeft - 5 << "\" y=\"" << kTop + plot_h + 4 << "\" text-anchor=\"end\">0</text>\n";

    std::vector<std::uint64_t> ticks;
    for (const auto& [p, pts] : series) {
        for (const auto& pt : pts) ticks.push_back(pt.first);
    }
    std::sort(ticks.begin(), ticks.end());
    ticks.erase(std::unique(ticks.begin(), ticks.end()), ticks.end());
    for (auto t : ticks) {
        os << "<text x=\"" << fixed(px(t)) << "\" y=\"" << kTop + plot_h + 16 << "\" text-anchor=\"middle\">" << t
           << "</text>\n";
    }

    double legend_y = kTop + 10;
    for (auto& [p, pts] : series) {
        std::sort(pts.begin(), pts.end());
        os << "<polyline fill=\"none\" stroke=\"" << colour(p) << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            os << (i ? " " : "") << fixed(px(pts[i].first)) << ',' << fixed(py(pts[i].second));
        }
        os << "\"/>\n";
        for (const auto& [x, y] : pts) {
            os << "<circle cx=\"" << fixed(px(x)) << "\" cy=\"" << fixed(py(y)) << "\" r=\"3\" fill=\"" << colour(p)
               << "\"/>\n";
        }
        const double lx = kLeft + plot_w + 15;
        os << "<line x1=\"" << lx << "\" y1=\"" << legend_y << "\" x2=\"" << lx + 20 << "\" y2=\"" << legend_y
           << "\" stroke=\"" << colour(p) << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << lx + 26 << "\" y=\"" << legend_y + 4 << "\">" << to_string(p) << "</text>\n";
        legend_y += 20;
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace xledger::cli
