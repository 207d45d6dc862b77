// SPDX-License-Identifier: Apache-2.0
//
// Smallest number of decaps reaching a target objective J*.

#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "dpp/model/devformer.hpp"
#include "dpp/search/search.hpp"
#include "dpp/sim/simulator.hpp"

namespace dpp::bench {

struct MinKResult {
  /// Smallest K with J >= target, or nullopt when K_max is not enough.
  std::optional<int> min_k;
  /// Placement achieving it (or the best one at K_max on failure).
  env::Placement placement;
  double score = 0.0;
  int evaluations = 0;
};

/// One greedy rollout of K_max steps; J is evaluated after every placed decap.
MinKResult min_k_policy(const model::DevFormer& model, const env::Problem& problem, double target, int k_max,
                        const sim::Simulator& simulator);

/// For K = 1..K_max runs `method` ("ga", "rs" or "exhaustive") at that K
/// and stops at the first K whose best placement reaches the target.
MinKResult min_k_search(const std::string& method, const env::Problem& problem, double target, int k_max,
                        int budget, std::uint64_t seed, const sim::Simulator& simulator);

}  // namespace dpp::bench
