#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace kgeeg {

struct Series {
  std::string name;
  std::vector<double> x, y;
  std::vector<double> err;  // optional symmetric error bars
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  double width = 640.0;
  double height = 400.0;
};

// Standalone SVG line chart with markers, axes, ticks and a legend.
std::string render_svg(const PlotSpec& spec, const std::vector<Series>& series);
void write_svg(const std::filesystem::path& path, const PlotSpec& spec,
               const std::vector<Series>& series);

}  // namespace kgeeg
