// Minimal static SVG renderer for the experiment CSVs.  Presentation only:
// series data pass through untransformed (axis mapping aside).
#pragma once

#include <optional>
#include <string>
#include <vector>

namespace superrad {

struct PlotSeries {
    std::string label;
    std::vector<double> x, y;
    std::vector<double> yerr; // empty: no error bars
    std::string color = "#1f6fb2";
    bool line = true;
    bool points = false;
    bool dashed = false;
};

struct PlotAxes {
    std::string title, xlabel, ylabel;
    bool logx = false;
    bool logy = false;
    std::vector<double> hguides; // horizontal dashed guide lines
    std::optional<double> ymin, ymax;
};

struct PlotPanel {
    PlotAxes axes;
    std::vector<PlotSeries> series;
};

/// Renders stacked panels into one SVG document.
std::string render_svg(const std::vector<PlotPanel>& panels, int width = 640,
                       int panel_height = 400);

void write_svg_file(const std::string& path, const std::vector<PlotPanel>& panels,
                    int width = 640, int panel_height = 400);

} // namespace superrad
