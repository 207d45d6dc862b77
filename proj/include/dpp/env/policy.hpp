// SPDX-License-Identifier: Apache-2.0
//
// Sequential placement policies: pi(a|x) = prod_t p(a_t | x, a_{1:t-1}).

#pragma once

#include <cstdint>
#include <vector>

#include "dpp/common/rng.hpp"
#include "dpp/env/problem.hpp"

namespace dpp::env {

class SequencePolicy {
 public:
  virtual ~SequencePolicy() = default;

  /// Log-probabilities over every port of the board for the next action.
  /// Infeasible ports must be exactly -inf.
  virtual std::vector<double> next_log_probs(const State& state) = 0;
};

enum class DecodeMode { Greedy, Sample };

struct Episode {
  Placement placement;
  double log_prob = 0.0;
};

/// K decode steps with cumulative masking. Greedy picks the most likely
/// port, lowest index on ties. Throws ContractViolation if the policy puts
/// mass on an infeasible port.
Episode run_episode(SequencePolicy& policy, const Problem& problem, int k, DecodeMode mode, Rng* rng = nullptr);

/// Teacher-forced sum of per-step log-probabilities.
double sequence_log_prob(SequencePolicy& policy, const Problem& problem, const Placement& placement);

/// Checks the masking contract on one distribution.
void check_mask_contract(const State& state, const std::vector<double>& log_probs);

/// Uniform over the feasible ports at every step.
class UniformPolicy final : public SequencePolicy {
 public:
  std::vector<double> next_log_probs(const State& state) override;
};

}  // namespace dpp::env
