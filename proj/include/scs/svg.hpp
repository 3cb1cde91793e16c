// Dependency-free SVG line charts for ROC curves, survival curves and
// effect-versus-size plots.
#pragma once

#include <string>
#include <vector>

namespace scs {

struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    bool step = false;  // draw as a right-continuous staircase
};

struct PlotOptions {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    int width = 640;
    int height = 480;
};

void write_line_chart(const std::string& path, const std::vector<PlotSeries>& series,
                      const PlotOptions& options);

}  // namespace scs
