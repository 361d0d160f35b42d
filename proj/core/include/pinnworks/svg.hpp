#pragma once

#include <string>
#include <vector>

namespace pinnworks {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool dashed = false;
};

struct ChartOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 640;
  int height = 400;
};

/// Standalone SVG document with axes, ticks and a legend.
std::string line_chart(const std::vector<Series>& series, const ChartOptions& options);

}  // namespace pinnworks
