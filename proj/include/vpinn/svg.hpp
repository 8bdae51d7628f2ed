#pragma once

#include <string>
#include <vector>

namespace vpinn {

struct PlotSeries {
    std::string label;
    std::string color;
    std::vector<double> x;
    std::vector<double> y;
    bool markers = true;
};

enum class AxisScale { linear, log };

// minimal static plot: axes, ticks, polyline series, legend
void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label, AxisScale x_scale,
                    AxisScale y_scale, const std::vector<PlotSeries>& series);

}  // namespace vpinn
