#include "sdve/svg_chart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sdve::cli {

namespace {

constexpr double kWidth = 860, kHeight = 480;
constexpr double kLeft = 70, kRight = 170, kTop = 50, kBottom = 55;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// round tick spacing to a 1/2/5 decade
double nice_step(double range, int target_ticks) {
  if (range <= 0.0) return 1.0;
  const double raw = range / std::max(1, target_ticks);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  double step = 10.0;
  if (norm <= 1.0) step = 1.0;
  else if (norm <= 2.0) step = 2.0;
  else if (norm <= 5.0) step = 5.0;
  return step * mag;
}

}  // namespace

std::string render_line_chart(const std::vector<ChartSeries>& series, const std::string& title,
                              const std::string& x_label, const std::string& y_label) {
  if (series.empty()) throw std::invalid_argument("render_line_chart: no series");

  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  bool have_point = false;
  for (const ChartSeries& s : series) {
    if (s.xs.size() != s.ys.size())
      throw std::invalid_argument("render_line_chart: series '" + s.name + "' xs/ys length mismatch");
    for (size_t i = 0; i < s.xs.size(); ++i) {
      if (!std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) continue;
      if (!have_point) {
        xmin = xmax = s.xs[i];
        ymin = ymax = s.ys[i];
        have_point = true;
      } else {
        xmin = std::min(xmin, s.xs[i]);
        xmax = std::max(xmax, s.xs[i]);
        ymin = std::min(ymin, s.ys[i]);
        ymax = std::max(ymax, s.ys[i]);
      }
    }
  }
  if (!have_point) throw std::invalid_argument("render_line_chart: no finite data points");
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) {
    ymax += ymax == 0.0 ? 1.0 : std::fabs(ymax) * 0.1;
    ymin -= ymin == 0.0 ? 1.0 : std::fabs(ymin) * 0.1;
  }

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto map_x = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * plot_w; };
  auto map_y = [&](double y) { return kTop + (1.0 - (y - ymin) / (ymax - ymin)) * plot_h; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << kWidth << " " << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
      << xml_escape(title) << "</text>\n";

  // gridlines + ticks
  const double xstep = nice_step(xmax - xmin, 8);
  const double ystep = nice_step(ymax - ymin, 6);
  svg << "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
  for (double x = std::ceil(xmin / xstep) * xstep; x <= xmax + 1e-9 * xstep; x += xstep)
    svg << "  <line x1=\"" << fmt(map_x(x)) << "\" y1=\"" << fmt(kTop) << "\" x2=\""
        << fmt(map_x(x)) << "\" y2=\"" << fmt(kTop + plot_h) << "\"/>\n";
  for (double y = std::ceil(ymin / ystep) * ystep; y <= ymax + 1e-9 * ystep; y += ystep)
    svg << "  <line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(map_y(y)) << "\" x2=\""
        << fmt(kLeft + plot_w) << "\" y2=\"" << fmt(map_y(y)) << "\"/>\n";
  svg << "</g>\n";
  svg << "<g fill=\"#333333\">\n";
  for (double x = std::ceil(xmin / xstep) * xstep; x <= xmax + 1e-9 * xstep; x += xstep)
    svg << "  <text x=\"" << fmt(map_x(x)) << "\" y=\"" << fmt(kTop + plot_h + 18)
        << "\" text-anchor=\"middle\">" << fmt(x) << "</text>\n";
  for (double y = std::ceil(ymin / ystep) * ystep; y <= ymax + 1e-9 * ystep; y += ystep)
    svg << "  <text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(map_y(y) + 4)
        << "\" text-anchor=\"end\">" << fmt(y) << "</text>\n";
  svg << "</g>\n";

  svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\""
      << plot_h << "\" fill=\"none\" stroke=\"#333333\"/>\n";
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\">" << xml_escape(x_label) << "</text>\n";
  svg << "<text x=\"18\" y=\"" << kTop + plot_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << kTop + plot_h / 2 << ")\">" << xml_escape(y_label) << "</text>\n";

  for (size_t si = 0; si < series.size(); ++si) {
    const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
    for (size_t i = 0; i < series[si].xs.size(); ++i) {
      const double x = series[si].xs[i], y = series[si].ys[i];
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      svg << fmt(map_x(x)) << ',' << fmt(map_y(y)) << ' ';
    }
    svg << "\"/>\n";
    const double ly = kTop + 16 + 18 * double(si);
    svg << "<line x1=\"" << kLeft + plot_w + 12 << "\" y1=\"" << ly << "\" x2=\""
        << kLeft + plot_w + 34 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << kLeft + plot_w + 40 << "\" y=\"" << ly + 4 << "\">"
        << xml_escape(series[si].name) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void save_line_chart(const std::filesystem::path& path, const std::vector<ChartSeries>& series,
                     const std::string& title, const std::string& x_label,
                     const std::string& y_label) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_line_chart: cannot open " + path.string());
  out << render_line_chart(series, title, x_label, y_label);
}

}  // namespace sdve::cli
