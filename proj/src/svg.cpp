#include "bessched/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "bessched/csvio.hpp"

namespace bessched::svg {

namespace {

constexpr double kWidth = 860, kHeight = 480;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void include(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!(lo < hi)) {
      lo -= 1.0;
      hi += 1.0;
    }
    const double margin = 0.04 * (hi - lo);
    lo -= margin;
    hi += margin;
  }
};

double nice_step(double span) {
  const double raw = span / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) return m * mag;
  return 10.0 * mag;
}

}  // namespace

void write_chart(const std::string& path, const std::string& title, const std::string& x_label,
                 const std::string& y_label, const std::vector<Series>& series) {
  Range xr, yr;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      xr.include(x);
      yr.include(y);
    }
  if (!std::isfinite(xr.lo) || !std::isfinite(yr.lo))
    throw std::invalid_argument("svg chart: no points");
  xr.pad();
  yr.pad();

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * plot_w; };
  auto py = [&](double y) { return kTop + plot_h - (y - yr.lo) / (yr.hi - yr.lo) * plot_h; };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='" << kHeight
      << "' viewBox='0 0 " << kWidth << ' ' << kHeight << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << kWidth / 2 << "' y='22' text-anchor='middle' font-size='16'>" << title
      << "</text>\n";

  // Axes, grid and tick labels.
  const double xstep = nice_step(xr.hi - xr.lo);
  const double ystep = nice_step(yr.hi - yr.lo);
  out << "<g font-size='11' fill='#444'>\n";
  for (double x = std::ceil(xr.lo / xstep) * xstep; x <= xr.hi; x += xstep) {
    out << "<line x1='" << px(x) << "' y1='" << kTop << "' x2='" << px(x) << "' y2='"
        << kTop + plot_h << "' stroke='#ddd'/>\n";
    out << "<text x='" << px(x) << "' y='" << kTop + plot_h + 16 << "' text-anchor='middle'>"
        << csv::format(x) << "</text>\n";
  }
  for (double y = std::ceil(yr.lo / ystep) * ystep; y <= yr.hi; y += ystep) {
    out << "<line x1='" << kLeft << "' y1='" << py(y) << "' x2='" << kLeft + plot_w << "' y2='"
        << py(y) << "' stroke='#ddd'/>\n";
    out << "<text x='" << kLeft - 6 << "' y='" << py(y) + 4 << "' text-anchor='end'>"
        << csv::format(y) << "</text>\n";
  }
  out << "</g>\n";
  out << "<rect x='" << kLeft << "' y='" << kTop << "' width='" << plot_w << "' height='" << plot_h
      << "' fill='none' stroke='#333'/>\n";
  out << "<text x='" << kLeft + plot_w / 2 << "' y='" << kHeight - 12
      << "' text-anchor='middle' font-size='13'>" << x_label << "</text>\n";
  out << "<text x='16' y='" << kTop + plot_h / 2
      << "' text-anchor='middle' font-size='13' transform='rotate(-90 16 " << kTop + plot_h / 2
      << ")'>" << y_label << "</text>\n";

  for (const auto& s : series) {
    if (s.markers_only) {
      for (const auto& [x, y] : s.points)
        out << "<circle cx='" << px(x) << "' cy='" << py(y) << "' r='3' fill='" << s.color
            << "'/>\n";
      continue;
    }
    out << "<polyline fill='none' stroke='" << s.color << "' stroke-width='" << s.width << "'";
    if (s.dashed) out << " stroke-dasharray='6 4'";
    out << " points='";
    for (const auto& [x, y] : s.points) out << px(x) << ',' << py(y) << ' ';
    out << "'/>\n";
  }

  // Legend.
  double ly = kTop + 14;
  for (const auto& s : series) {
    if (s.label.empty()) continue;
    out << "<line x1='" << kLeft + plot_w - 150 << "' y1='" << ly << "' x2='"
        << kLeft + plot_w - 120 << "' y2='" << ly << "' stroke='" << s.color << "' stroke-width='2'";
    if (s.dashed) out << " stroke-dasharray='6 4'";
    out << "/>\n";
    out << "<text x='" << kLeft + plot_w - 114 << "' y='" << ly + 4 << "' font-size='12'>"
        << s.label << "</text>\n";
    ly += 18;
  }
  out << "</svg>\n";
}

}  // namespace bessched::svg
