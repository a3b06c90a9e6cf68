#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace denserew::harness {

struct Series {
  std::string name;
  std::vector<double> y;
};

/// Minimal line chart; x is the sample index.
void write_svg_plot(std::ostream& out, const std::string& title, const std::string& x_label,
                    const std::string& y_label, const std::vector<Series>& series);

/// Trailing moving average with a window of `w` (shorter at the start).
std::vector<double> moving_average(const std::vector<double>& y, std::size_t w);

}  // namespace denserew::harness
