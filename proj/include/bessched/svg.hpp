#pragma once

#include <string>
#include <utility>
#include <vector>

namespace bessched::svg {

struct Series {
  std::vector<std::pair<double, double>> points;
  std::string color = "#1f77b4";
  std::string label;
  bool markers_only = false;  // scatter markers instead of a polyline
  bool dashed = false;
  double width = 1.5;
};

/// Minimal polyline/scatter chart with axes, ticks and a legend. CSV outputs
/// stay authoritative; this is a convenience view.
void write_chart(const std::string& path, const std::string& title, const std::string& x_label,
                 const std::string& y_label, const std::vector<Series>& series);

}  // namespace bessched::svg
