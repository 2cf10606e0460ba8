#pragma once

#include <string>
#include <vector>

namespace impgraph::plot {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Line chart as a standalone SVG document. Output depends only on the inputs.
std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<Series>& series,
                       bool unit_axes = false);

/// Matrix heatmap (row-major values) as SVG.
std::string heatmap(const std::string& title, const std::vector<double>& values, int rows,
                    int cols);

}  // namespace impgraph::plot
