// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace doorinet::app {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  std::size_t max_points = 4000;  // per series; longer series are decimated
};

/// Line chart as a standalone SVG document.
std::string line_plot_svg(const PlotSpec& spec, const std::vector<PlotSeries>& series);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace doorinet::app
