#pragma once

#include <string>
#include <utility>
#include <vector>

namespace gmmimm::svg {

struct Series {
  std::string name;
  std::vector<double> values; // y per step, x = index
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::vector<std::pair<std::string, double>> reference_lines; // dashed horizontals
  bool log_y = false;
};

struct BarChart {
  std::string title;
  std::string y_label;
  std::vector<std::string> series_names;      // bars within a group
  std::vector<std::string> group_labels;      // x axis categories
  std::vector<std::vector<double>> values;    // [group][series]
};

std::string render(const LineChart &chart, int width = 900, int height = 320);
std::string render(const BarChart &chart, int width = 900, int height = 360);

} // namespace gmmimm::svg
