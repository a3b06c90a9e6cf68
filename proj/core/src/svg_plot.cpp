#include "denserew/harness/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace denserew::harness {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

void write_svg_plot(std::ostream& out, const std::string& title, const std::string& x_label,
                    const std::string& y_label, const std::vector<Series>& series) {
  const double W = 640, H = 400, left = 60, right = 150, top = 40, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;
  std::size_t n = 1;
  double lo = 0.0, hi = 1.0;
  bool first = true;
  for (const auto& s : series)
    for (double v : s.y) {
      if (!std::isfinite(v)) continue;
      if (first) lo = hi = v, first = false;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  for (const auto& s : series) n = std::max(n, s.y.size());
  if (hi - lo < 1e-12) hi = lo + 1.0;

  auto px = [&](std::size_t i) { return left + pw * (n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0); };
  auto py = [&](double v) { return top + ph * (1.0 - (v - lo) / (hi - lo)); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(title) << "</text>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
      << escape(x_label) << "</text>\n";
  out << "<text x=\"16\" y=\"" << top + ph / 2 << "\" transform=\"rotate(-90 16 " << top + ph / 2
      << ")\" text-anchor=\"middle\" font-size=\"12\">" << escape(y_label) << "</text>\n";
  out << "<text x=\"" << left - 6 << "\" y=\"" << top + 4 << "\" text-anchor=\"end\" font-size=\"10\">" << hi << "</text>\n";
  out << "<text x=\"" << left - 6 << "\" y=\"" << top + ph << "\" text-anchor=\"end\" font-size=\"10\">" << lo << "</text>\n";
  out << "<text x=\"" << left + pw << "\" y=\"" << top + ph + 14 << "\" text-anchor=\"end\" font-size=\"10\">" << n - 1 << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* colour = kPalette[k % std::size(kPalette)];
    out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series[k].y.size(); ++i)
      if (std::isfinite(series[k].y[i])) out << px(i) << ',' << py(series[k].y[i]) << ' ';
    out << "\"/>\n";
    const double ly = top + 14 + 18 * static_cast<double>(k);
    out << "<line x1=\"" << left + pw + 10 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 30 << "\" y2=\"" << ly
        << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << left + pw + 36 << "\" y=\"" << ly + 4 << "\" font-size=\"11\">" << escape(series[k].name)
        << "</text>\n";
  }
  out << "</svg>\n";
}

std::vector<double> moving_average(const std::vector<double>& y, std::size_t w) {
  std::vector<double> out(y.size());
  double s = 0.0;
  w = std::max<std::size_t>(w, 1);
  for (std::size_t i = 0; i < y.size(); ++i) {
    s += y[i];
    if (i >= w) s -= y[i - w];
    out[i] = s / static_cast<double>(std::min(i + 1, w));
  }
  return out;
}

}  // namespace denserew::harness
