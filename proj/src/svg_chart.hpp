#pragma once

#include <optional>
#include <string>
#include <vector>

namespace interdyn::detail {

struct Series {
  std::string name;
  std::string color;
  std::vector<std::optional<double>> values;
};

// Standalone SVG line chart; missing values break the line.
std::string line_chart_svg(const std::string& title, const std::string& y_label,
                           const std::vector<double>& x, const std::vector<Series>& series);

}  // namespace interdyn::detail
