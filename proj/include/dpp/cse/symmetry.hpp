// SPDX-License-Identifier: Apache-2.0
//
// Action-permutation transforms and order bias
//   b(pi; p) = E_x E_a E_t | pi(a|x) - pi(t(a)|x) |.

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "dpp/common/rng.hpp"
#include "dpp/env/policy.hpp"
#include "dpp/search/search.hpp"

namespace dpp::cse {

/// Uniformly random reordering of the actions (Fisher-Yates).
env::Placement ap_transform(const env::Placement& placement, Rng& rng);
env::Placement ap_transform(const env::Placement& placement, std::uint64_t seed);
/// Applies an explicit permutation: out[i] = in[perm[i]].
env::Placement apply_permutation(const env::Placement& placement, std::span<const int> perm);

/// Each record followed by P permuted copies; copy j of record i uses
/// seed derive_seed(seed, i * (P + 1) + j + 1). Size N * (P + 1).
std::vector<search::ExpertRecord> augment(std::span<const search::ExpertRecord> records, int p, std::uint64_t seed);

using PolicyFactory = std::function<std::unique_ptr<env::SequencePolicy>()>;

struct OrderBiasEstimate {
  double value = 0.0;
  int samples = 0;
  std::uint64_t seed = 0;
};

/// Monte Carlo over S triples: x uniform over `problems`, a ~ pi (K steps),
/// t uniform over permutations. Triple s draws from derive_seed(seed, s),
/// so the result is independent of the thread count.
OrderBiasEstimate order_bias_estimate(const PolicyFactory& make_policy, std::span<const env::Problem> problems,
                                      int k, int samples, std::uint64_t seed, int threads = 1);

/// How trajectories are weighted in the exact computation.
enum class TrajectoryWeights { Policy, Uniform };

/// Exact b by enumerating every ordered K-trajectory and every permutation
/// (x uniform over `problems`, t uniform).
double order_bias_exact(env::SequencePolicy& policy, std::span<const env::Problem> problems, int k,
                        TrajectoryWeights weights);

struct TheoremReport {
  double order_bias = 0.0;
  std::size_t trajectories = 0;
  std::size_t pairs_checked = 0;
  std::size_t unequal_pairs = 0;
  /// First (a, t(a)) pair with pi(a|x) != pi(t(a)|x), if any.
  env::Placement witness_a;
  env::Placement witness_ta;
  double witness_gap = 0.0;
  /// b == 0 exactly iff no unequal pair was found.
  bool consistent = false;
};

/// Enumerates a tiny board (at most 6 free ports, K <= 3). `trajectory_weights`
/// defaults to uniform; when given it must hold one strictly positive weight
/// per ordered trajectory in lexicographic order. Permutations are weighted
/// uniformly.
TheoremReport theorem_check(env::SequencePolicy& policy, const env::Problem& problem, int k,
                            std::span<const double> trajectory_weights = {});

/// All ordered K-trajectories over the free ports of `problem`,
/// lexicographic.
std::vector<env::Placement> enumerate_trajectories(const env::Problem& problem, int k);
/// All permutations of {0..K-1}, lexicographic.
std::vector<std::vector<int>> all_permutations(int k);

}  // namespace dpp::cse
