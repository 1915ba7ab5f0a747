#pragma once

#include <string>
#include <vector>

namespace sorn::plot {

struct LineSeries {
    std::string name;
    std::vector<double> values;
    std::string color = "#1f77b4";
};

/// Minimal SVG line chart: shared x axis by index, auto-scaled y axis,
/// a legend and axis ticks.
void write_line_chart(const std::string& path, const std::string& title,
                      const std::vector<LineSeries>& series, int width = 960, int height = 320);

}  // namespace sorn::plot
