// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "dpp/nn/graph.hpp"

namespace dpp::nn {

/// Builds a scalar loss from the store inside the given graph. Must bind
/// parameters through a tracking Binder and must not touch running stats.
using LossBuilder = std::function<Var(Graph&, ParamStore&)>;

struct GradCheckOptions {
  double eps = 1e-4;
  /// Relative error is |a - n| / max(|a|, |n|, floor).
  double floor = 1e-6;
  std::size_t full_limit = 10000;
  double sample_fraction = 0.01;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  /// Coordinates whose +/- eps perturbation flipped a ReLU sign and were
  /// therefore excluded.
  std::size_t skipped_kinks = 0;
  std::string worst_name;
  Index worst_index = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Central differences against reverse mode for every trainable coordinate,
/// or a uniform random subsample of sample_fraction when the store holds
/// more than full_limit coordinates. Throws NumericError on non-finite loss.
GradCheckResult grad_check(const LossBuilder& loss, ParamStore& store, const GradCheckOptions& opt = {});

}  // namespace dpp::nn
