// SPDX-License-Identifier: Apache-2.0
//
// Training objectives:
//   expert  = -mean log pi_theta(a* | x)                 (teacher forcing)
//   self    = mean |pi_frozen(a'|x) - pi_theta(t(a')|x)|  a' ~ pi_frozen
//   total   = expert + lambda_eff * self

#pragma once

#include <cstdint>
#include <vector>

#include "dpp/model/devformer.hpp"

namespace dpp::cse {

/// Mean negative log-likelihood with batch-norm in training mode. Running
/// statistics are updated only if the binder allows it.
nn::Var expert_loss(const model::DevFormer& model, nn::Binder& p, const std::vector<const env::Problem*>& problems,
                    const std::vector<const env::Placement*>& labels);

struct SelfSample {
  env::Problem problem;
  env::Placement sampled;      // a' ~ pi_frozen
  env::Placement transformed;  // t(a')
};

/// Samples a' from `frozen` for each problem (stream derive_seed(seed, i))
/// and draws `transforms` permutations of it.
std::vector<SelfSample> sample_self_batch(const model::DevFormer& frozen, const std::vector<env::Problem>& problems,
                                          int k, std::uint64_t seed, int transforms = 1, int threads = 1);

/// Self-exploitation term. Both sequence probabilities come from the batched
/// teacher-forced path with batch-norm in eval mode; `frozen` enters the
/// graph as constants so no gradient reaches it.
nn::Var self_loss(const model::DevFormer& model, nn::Binder& p, const model::DevFormer& frozen,
                  const std::vector<SelfSample>& samples);

nn::Var total_loss(nn::Graph& g, nn::Var expert, nn::Var self, double lambda_eff);

}  // namespace dpp::cse
