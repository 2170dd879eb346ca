#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace didcnc {

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;  // non-finite y breaks the line
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::optional<double> x_min, x_max, y_min, y_max;
  int width = 640;
  int height = 420;
};

// Static line chart with axes, ticks and a legend.
void write_svg_plot(std::ostream& os, const std::vector<PlotSeries>& series,
                    const PlotOptions& options);

}  // namespace didcnc
