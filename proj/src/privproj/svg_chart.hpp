#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace privproj::svg {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;  ///< (x, y), drawn in order
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  /// Dashed horizontal reference line.
  std::optional<double> baseline_y;
  std::string baseline_label;
  int width = 720;
  int height = 480;
};

std::string render(const LineChart& chart);

std::string xml_escape(std::string_view s);

}  // namespace privproj::svg
