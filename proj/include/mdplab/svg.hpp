#pragma once

#include <string>
#include <vector>

namespace mdplab {

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Static line plot with axes and a small legend.
std::string svg_line_plot(const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<SvgSeries>& series);

}  // namespace mdplab
