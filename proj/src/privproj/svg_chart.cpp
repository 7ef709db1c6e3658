#include "privproj/svg_chart.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace privproj::svg {

namespace {

constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                              "#9467bd", "#8c564b", "#e377c2", "#17becf"};

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void include(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }

  // Pads and snaps to a tick step so axes start and end on a tick.
  double nice(int target_ticks) {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-9) {
      lo -= 0.05;
      hi += 0.05;
    }
    const double raw = (hi - lo) / target_ticks;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 2.5, 5.0, 10.0})
      if (m * mag >= raw) {
        step = m * mag;
        break;
      }
    lo = std::floor(lo / step) * step;
    hi = std::ceil(hi / step) * step;
    return step;
  }
};

}  // namespace

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string render(const LineChart& chart) {
  const double left = 70, right = 190, top = 40, bottom = 60;
  const double pw = chart.width - left - right;
  const double ph = chart.height - top - bottom;

  Range xr, yr;
  for (const auto& s : chart.series)
    for (const auto& [x, y] : s.points) {
      xr.include(x);
      yr.include(y);
    }
  if (chart.baseline_y) yr.include(*chart.baseline_y);
  const double xstep = xr.nice(5);
  const double ystep = yr.nice(5);

  auto sx = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto sy = [&](double y) { return top + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph; };

  std::string o;
  o += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      chart.width, chart.height);
  o += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", chart.width, chart.height);
  o += fmt::format("<text x=\"{:.1f}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
                   left + pw / 2, xml_escape(chart.title));

  // Grid and ticks.
  for (double x = xr.lo; x <= xr.hi + xstep * 1e-6; x += xstep) {
    o += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"#e0e0e0\"/>\n",
                     sx(x), top, top + ph);
    o += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{:.3g}</text>\n", sx(x),
                     top + ph + 18, x);
  }
  for (double y = yr.lo; y <= yr.hi + ystep * 1e-6; y += ystep) {
    o += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"#e0e0e0\"/>\n",
                     left, sy(y), left + pw);
    o += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{:.3g}</text>\n", left - 6,
                     sy(y) + 4, y);
  }
  o += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"none\" stroke=\"black\"/>\n",
                   left, top, pw, ph);
  o += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n", left + pw / 2,
                   chart.height - 18.0, xml_escape(chart.x_label));
  o += fmt::format(
      "<text x=\"18\" y=\"{0:.2f}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0:.2f})\">{1}</text>\n",
      top + ph / 2, xml_escape(chart.y_label));

  if (chart.baseline_y) {
    o += fmt::format(
        "<line class=\"baseline\" x1=\"{0:.2f}\" y1=\"{2:.2f}\" x2=\"{1:.2f}\" y2=\"{2:.2f}\" stroke=\"#555\" "
        "stroke-dasharray=\"6,4\"/>\n",
        left, left + pw, sy(*chart.baseline_y));
  }

  double legend_y = top + 10;
  for (std::size_t i = 0; i < chart.series.size(); ++i) {
    const auto& s = chart.series[i];
    const char* color = kPalette[i % kPalette.size()];
    std::string pts;
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (!pts.empty()) pts += ' ';
      pts += fmt::format("{:.2f},{:.2f}", sx(x), sy(y));
    }
    o += fmt::format("<g class=\"series\" data-name=\"{}\">\n", xml_escape(s.name));
    o += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>\n", pts, color);
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      o += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3.5\" fill=\"{}\"/>\n", sx(x), sy(y), color);
    }
    o += "</g>\n";
    const double lx = left + pw + 14;
    o += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                     lx, legend_y, lx + 22, legend_y, color);
    o += fmt::format("<text class=\"legend\" x=\"{:.2f}\" y=\"{:.2f}\">{}</text>\n", lx + 28, legend_y + 4,
                     xml_escape(s.name));
    legend_y += 18;
  }
  if (chart.baseline_y) {
    const double lx = left + pw + 14;
    o += fmt::format(
        "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#555\" stroke-dasharray=\"6,4\"/>\n",
        lx, legend_y, lx + 22, legend_y);
    o += fmt::format("<text class=\"legend\" x=\"{:.2f}\" y=\"{:.2f}\">{}</text>\n", lx + 28, legend_y + 4,
                     xml_escape(chart.baseline_label));
  }
  o += "</svg>\n";
  return o;
}

}  // namespace privproj::svg
