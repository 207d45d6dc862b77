// SPDX-License-Identifier: Apache-2.0

#include "dpp/bench/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "dpp/common/errors.hpp"

namespace dpp::bench {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Axis {
  double lo, hi;
  bool log;
  double map(double v, double a, double b) const {
    const double t = log ? (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo)) : (v - lo) / (hi - lo);
    return a + t * (b - a);
  }
  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      for (double d = std::floor(std::log10(lo)); d <= std::ceil(std::log10(hi)); d += 1.0) {
        const double v = std::pow(10.0, d);
        if (v >= lo * (1 - 1e-12) && v <= hi * (1 + 1e-12)) out.push_back(v);
      }
      if (out.size() < 2) out = {lo, hi};
      return out;
    }
    for (int i = 0; i <= 5; ++i) out.push_back(lo + (hi - lo) * i / 5.0);
    return out;
  }
};

Axis make_axis(double lo, double hi, bool log) {
  if (!(lo < hi)) {
    const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.05;
    lo -= pad;
    hi += pad;
    if (log && lo <= 0.0) lo = hi / 10.0;
  }
  return {lo, hi, log};
}

}  // namespace

std::string line_plot_svg(const std::vector<Series>& series, const PlotSpec& spec) {
  require(!series.empty(), "line_plot_svg: no series");
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    require(s.x.size() == s.y.size(), "line_plot_svg: x/y length mismatch in " + s.label);
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (spec.log_x && s.x[i] <= 0.0) continue;
      if (spec.log_y && s.y[i] <= 0.0) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  require(std::isfinite(x0) && std::isfinite(y0), "line_plot_svg: no plottable points");
  const Axis ax = make_axis(x0, x1, spec.log_x);
  const Axis ay = make_axis(y0, y1, spec.log_y);

  const double W = 640, H = 420, L = 80, R = 170, T = 40, B = 60;
  const double px0 = L, px1 = W - R, py0 = H - B, py1 = T;
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" "
                  "font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(W / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" + esc(spec.title) + "</text>\n";
  s += "<rect x=\"" + num(px0) + "\" y=\"" + num(py1) + "\" width=\"" + num(px1 - px0) + "\" height=\"" +
       num(py0 - py1) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ax.ticks()) {
    const double x = ax.map(t, px0, px1);
    s += "<line x1=\"" + num(x) + "\" y1=\"" + num(py0) + "\" x2=\"" + num(x) + "\" y2=\"" + num(py0 + 5) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(x) + "\" y=\"" + num(py0 + 18) + "\" text-anchor=\"middle\">" + tick_label(t) + "</text>\n";
  }
  for (double t : ay.ticks()) {
    const double y = ay.map(t, py0, py1);
    s += "<line x1=\"" + num(px0 - 5) + "\" y1=\"" + num(y) + "\" x2=\"" + num(px0) + "\" y2=\"" + num(y) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(px0 - 8) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" + tick_label(t) + "</text>\n";
  }
  s += "<text x=\"" + num((px0 + px1) / 2) + "\" y=\"" + num(H - 15) + "\" text-anchor=\"middle\">" +
       esc(spec.x_label) + "</text>\n";
  s += "<text x=\"18\" y=\"" + num((py0 + py1) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
       num((py0 + py1) / 2) + ")\">" + esc(spec.y_label) + "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& sr = series[k];
    const std::string color = kPalette[k % (sizeof kPalette / sizeof kPalette[0])];
    std::string pts;
    for (std::size_t i = 0; i < sr.x.size(); ++i) {
      if (!std::isfinite(sr.x[i]) || !std::isfinite(sr.y[i])) continue;
      if ((spec.log_x && sr.x[i] <= 0.0) || (spec.log_y && sr.y[i] <= 0.0)) continue;
      const double x = ax.map(sr.x[i], px0, px1);
      const double y = ay.map(sr.y[i], py0, py1);
      pts += num(x) + "," + num(y) + " ";
      if (spec.markers)
        s += "<circle cx=\"" + num(x) + "\" cy=\"" + num(y) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
    }
    s += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    const double ly = T + 10 + 18.0 * static_cast<double>(k);
    s += "<line x1=\"" + num(px1 + 12) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(px1 + 32) + "\" y2=\"" + num(ly) +
         "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + num(px1 + 38) + "\" y=\"" + num(ly + 4) + "\">" + esc(sr.label) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

std::string placement_heatmap_svg(const env::Problem& problem, const env::Placement& placement,
                                  const std::string& title) {
  problem.validate();
  const double cell = std::max(12.0, std::min(40.0, 480.0 / std::max(problem.n_rows, problem.n_cols)));
  const double off_x = 20, off_y = 40;
  const double W = off_x * 2 + cell * problem.n_cols + 130;
  const double H = off_y + cell * problem.n_rows + 20;
  std::vector<int> order(static_cast<std::size_t>(problem.n_ports()), 0);
  for (std::size_t i = 0; i < placement.actions.size(); ++i)
    order[static_cast<std::size_t>(placement.actions[i])] = static_cast<int>(i) + 1;

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(W) + "\" height=\"" + num(H) +
                  "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  s += "<rect width=\"" + num(W) + "\" height=\"" + num(H) + "\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(off_x) + "\" y=\"24\" font-size=\"13\">" + esc(title) + "</text>\n";
  for (int p = 0; p < problem.n_ports(); ++p) {
    const double x = off_x + cell * problem.col_of(p);
    const double y = off_y + cell * problem.row_of(p);
    std::string fill = "#ffffff";
    std::string cls = "free";
    if (p == problem.probe) {
      fill = "#d62728";
      cls = "probe";
    } else if (problem.is_keepout(p)) {
      fill = "#7f7f7f";
      cls = "keepout";
    } else if (order[static_cast<std::size_t>(p)] > 0) {
      fill = "#1f77b4";
      cls = "decap";
    }
    s += "<rect class=\"" + cls + "\" x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(cell) +
         "\" height=\"" + num(cell) + "\" fill=\"" + fill + "\" stroke=\"#333333\" stroke-width=\"0.5\"/>\n";
    if (order[static_cast<std::size_t>(p)] > 0)
      s += "<text x=\"" + num(x + cell / 2) + "\" y=\"" + num(y + cell / 2 + 3) +
           "\" text-anchor=\"middle\" fill=\"white\">" + std::to_string(order[static_cast<std::size_t>(p)]) +
           "</text>\n";
  }
  const double lx = off_x * 2 + cell * problem.n_cols;
  const char* names[] = {"probe", "keep-out", "decap", "free"};
  const char* fills[] = {"#d62728", "#7f7f7f", "#1f77b4", "#ffffff"};
  for (int i = 0; i < 4; ++i) {
    const double ly = off_y + 18.0 * i;
    s += "<rect x=\"" + num(lx) + "\" y=\"" + num(ly) + "\" width=\"12\" height=\"12\" fill=\"" + fills[i] +
         "\" stroke=\"#333333\"/>\n";
    s += "<text x=\"" + num(lx + 18) + "\" y=\"" + num(ly + 10) + "\">" + names[i] + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace dpp::bench
