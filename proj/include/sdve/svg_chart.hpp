#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace sdve::cli {

struct ChartSeries {
  std::string name;
  std::vector<double> xs;
  std::vector<double> ys;
};

// Pure-text SVG line chart: axes with ticks, one polyline per series,
// legend. Non-finite points are skipped.
std::string render_line_chart(const std::vector<ChartSeries>& series, const std::string& title,
                              const std::string& x_label, const std::string& y_label);

void save_line_chart(const std::filesystem::path& path, const std::vector<ChartSeries>& series,
                     const std::string& title, const std::string& x_label,
                     const std::string& y_label);

}  // namespace sdve::cli
