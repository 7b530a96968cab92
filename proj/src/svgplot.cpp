#include "superrad/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "superrad/types.hpp"

namespace superrad {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

struct AxisScale {
    double lo = 0.0, hi = 1.0;
    bool log = false;
    double px0 = 0.0, px1 = 1.0;

    double to_px(double v) const {
        double t;
        if (log)
            t = (std::log10(v) - std::log10(lo)) /
                (std::log10(hi) - std::log10(lo));
        else
            t = (v - lo) / (hi - lo);
        return px0 + t * (px1 - px0);
    }
};

// Round tick positions: 1-2-5 ladder for linear, decades for log.
std::vector<double> ticks_for(const AxisScale& s) {
    std::vector<double> ticks;
    if (s.log) {
        const int e0 = int(std::floor(std::log10(s.lo) + 1e-9));
        const int e1 = int(std::ceil(std::log10(s.hi) - 1e-9));
        for (int e = e0; e <= e1; ++e) {
            const double v = std::pow(10.0, e);
            if (v >= s.lo * (1 - 1e-9) && v <= s.hi * (1 + 1e-9))
                ticks.push_back(v);
        }
        return ticks;
    }
    const double span = s.hi - s.lo;
    if (span <= 0) return {s.lo};
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (mag * m >= raw) {
            step = mag * m;
            break;
        }
    const double first = std::ceil(s.lo / step) * step;
    for (double v = first; v <= s.hi + 1e-9 * span; v += step)
        ticks.push_back(std::abs(v) < 1e-12 * span ? 0.0 : v);
    return ticks;
}

} // namespace

std::string render_svg(const std::vector<PlotPanel>& panels, int width,
                       int panel_height) {
    const int margin_l = 64, margin_r = 16, margin_t = 28, margin_b = 44;
    const int total_h = int(panels.size()) * panel_height;
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << total_h << "\" font-family=\"sans-serif\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    for (std::size_t pi = 0; pi < panels.size(); ++pi) {
        const PlotPanel& panel = panels[pi];
        const double top = double(pi) * panel_height;

        double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
        for (const auto& s : panel.series)
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (panel.axes.logx && s.x[i] <= 0) continue;
                if (panel.axes.logy && s.y[i] <= 0) continue;
                xmin = std::min(xmin, s.x[i]);
                xmax = std::max(xmax, s.x[i]);
                const double e = i < s.yerr.size() ? s.yerr[i] : 0.0;
                ymin = std::min(ymin, s.y[i] - e);
                ymax = std::max(ymax, s.y[i] + e);
            }
        for (double g : panel.axes.hguides) {
            ymin = std::min(ymin, g);
            ymax = std::max(ymax, g);
        }
        if (xmin > xmax) { xmin = 0; xmax = 1; }
        if (ymin > ymax) { ymin = 0; ymax = 1; }
        if (panel.axes.ymin) ymin = *panel.axes.ymin;
        if (panel.axes.ymax) ymax = *panel.axes.ymax;
        if (!panel.axes.logy) {
            const double pad = 0.06 * (ymax - ymin + 1e-12);
            ymin -= pad;
            ymax += pad;
        }
        if (xmax == xmin) xmax = xmin + 1;
        if (ymax == ymin) ymax = ymin + 1;

        AxisScale xs{xmin, xmax, panel.axes.logx, double(margin_l),
                     double(width - margin_r)};
        AxisScale ys{ymin, ymax, panel.axes.logy,
                     top + panel_height - margin_b, top + margin_t};

        // frame
        svg << "<rect x=\"" << margin_l << "\" y=\"" << top + margin_t
            << "\" width=\"" << width - margin_l - margin_r << "\" height=\""
            << panel_height - margin_t - margin_b
            << "\" fill=\"none\" stroke=\"#333\"/>\n";
        if (!panel.axes.title.empty())
            svg << "<text x=\"" << margin_l << "\" y=\"" << top + 18
                << "\" font-size=\"13\">" << panel.axes.title << "</text>\n";

        for (double tx : ticks_for(xs)) {
            const double px = xs.to_px(tx);
            svg << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(ys.px0)
                << "\" x2=\"" << fmt(px) << "\" y2=\"" << fmt(ys.px0 + 4)
                << "\" stroke=\"#333\"/>\n";
            svg << "<text x=\"" << fmt(px) << "\" y=\"" << fmt(ys.px0 + 18)
                << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt(tx)
                << "</text>\n";
        }
        for (double ty : ticks_for(ys)) {
            const double py = ys.to_px(ty);
            svg << "<line x1=\"" << margin_l - 4 << "\" y1=\"" << fmt(py)
                << "\" x2=\"" << margin_l << "\" y2=\"" << fmt(py)
                << "\" stroke=\"#333\"/>\n";
            svg << "<text x=\"" << margin_l - 7 << "\" y=\"" << fmt(py + 4)
                << "\" font-size=\"11\" text-anchor=\"end\">" << fmt(ty)
                << "</text>\n";
        }
        if (!panel.axes.xlabel.empty())
            svg << "<text x=\"" << fmt(0.5 * (xs.px0 + xs.px1)) << "\" y=\""
                << fmt(ys.px0 + 36) << "\" font-size=\"12\" "
                << "text-anchor=\"middle\">" << panel.axes.xlabel << "</text>\n";
        if (!panel.axes.ylabel.empty())
            svg << "<text x=\"16\" y=\"" << fmt(0.5 * (ys.px0 + ys.px1))
                << "\" font-size=\"12\" text-anchor=\"middle\" transform=\""
                << "rotate(-90 16 " << fmt(0.5 * (ys.px0 + ys.px1)) << ")\">"
                << panel.axes.ylabel << "</text>\n";

        for (double g : panel.axes.hguides) {
            const double py = ys.to_px(g);
            svg << "<line class=\"guide\" x1=\"" << fmt(xs.px0) << "\" y1=\""
                << fmt(py) << "\" x2=\"" << fmt(xs.px1) << "\" y2=\"" << fmt(py)
                << "\" stroke=\"#999\" stroke-dasharray=\"6 4\"/>\n";
        }

        double legend_y = top + margin_t + 16;
        for (const auto& s : panel.series) {
            std::vector<std::pair<double, double>> pts;
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (panel.axes.logx && s.x[i] <= 0) continue;
                if (panel.axes.logy && s.y[i] <= 0) continue;
                pts.emplace_back(xs.to_px(s.x[i]), ys.to_px(s.y[i]));
            }
            if (s.line && pts.size() > 1) {
                svg << "<polyline fill=\"none\" stroke=\"" << s.color
                    << "\" stroke-width=\"1.5\"";
                if (s.dashed) svg << " stroke-dasharray=\"5 3\"";
                svg << " points=\"";
                for (auto& [px, py] : pts) svg << fmt(px) << ',' << fmt(py) << ' ';
                svg << "\"/>\n";
            }
            if (s.points)
                for (auto& [px, py] : pts)
                    svg << "<circle cx=\"" << fmt(px) << "\" cy=\"" << fmt(py)
                        << "\" r=\"2.6\" fill=\"" << s.color << "\"/>\n";
            if (!s.yerr.empty()) {
                for (std::size_t i = 0; i < s.x.size(); ++i) {
                    if (i >= s.yerr.size() || s.yerr[i] <= 0) continue;
                    if (panel.axes.logx && s.x[i] <= 0) continue;
                    const double px = xs.to_px(s.x[i]);
                    const double y_lo = s.y[i] - s.yerr[i];
                    const double y_hi = s.y[i] + s.yerr[i];
                    if (panel.axes.logy && y_lo <= 0) continue;
                    svg << "<line x1=\"" << fmt(px) << "\" y1=\""
                        << fmt(ys.to_px(y_lo)) << "\" x2=\"" << fmt(px)
                        << "\" y2=\"" << fmt(ys.to_px(y_hi)) << "\" stroke=\""
                        << s.color << "\"/>\n";
                }
            }
            if (!s.label.empty()) {
                svg << "<line x1=\"" << width - margin_r - 150 << "\" y1=\""
                    << fmt(legend_y - 4) << "\" x2=\"" << width - margin_r - 126
                    << "\" y2=\"" << fmt(legend_y - 4) << "\" stroke=\""
                    << s.color << "\" stroke-width=\"2\""
                    << (s.dashed ? " stroke-dasharray=\"5 3\"" : "") << "/>\n";
                svg << "<text x=\"" << width - margin_r - 120 << "\" y=\""
                    << fmt(legend_y) << "\" font-size=\"11\">" << s.label
                    << "</text>\n";
                legend_y += 16;
            }
        }
    }
    svg << "</svg>\n";
    return svg.str();
}

void write_svg_file(const std::string& path, const std::vector<PlotPanel>& panels,
                    int width, int panel_height) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write SVG: " + path);
    out << render_svg(panels, width, panel_height);
}

} // namespace superrad
