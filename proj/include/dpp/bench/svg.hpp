// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "dpp/env/problem.hpp"

namespace dpp::bench {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  bool markers = false;
};

/// Standalone SVG line chart with axes, ticks and a legend.
std::string line_plot_svg(const std::vector<Series>& series, const PlotSpec& spec);

/// Board view: probe red, keep-out grey, decaps blue with their placement
/// order, free ports white.
std::string placement_heatmap_svg(const env::Problem& problem, const env::Placement& placement,
                                  const std::string& title);

}  // namespace dpp::bench
