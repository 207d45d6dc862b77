// SPDX-License-Identifier: Apache-2.0
//
// Test-time search baselines: genetic algorithm, random search and an
// exhaustive enumerator for small boards.

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dpp/common/rng.hpp"
#include "dpp/env/problem.hpp"
#include "dpp/sim/simulator.hpp"

namespace dpp::search {

using env::Placement;
using env::Problem;

/// Scores one placement of a fixed problem; each call is one simulation.
using Scorer = std::function<double(const Placement&)>;

Scorer make_scorer(const Problem& problem, const sim::Simulator& simulator);

struct ExpertRecord {
  Problem problem;
  Placement placement;
  double score = 0.0;
  int budget = 0;
  std::uint64_t seed = 0;
};

struct GaConfig {
  int population = 20;
  int generations = 5;
  int elites = 4;
  std::uint64_t seed = 0;

  int budget() const { return population * generations; }
  void validate() const;

  /// M=100 -> (20, 5, 4); M=500 -> (50, 10, 10).
  static GaConfig preset(int budget, std::uint64_t seed = 0);
  /// preset() where one exists, otherwise population 20 with M/20
  /// generations and 4 elites (M must be a multiple of 20).
  static GaConfig for_budget(int budget, std::uint64_t seed = 0);
};

struct GaTrace {
  std::vector<double> best_per_generation;  // best-ever score after each generation
  int evaluations = 0;
};

/// Uniformly random feasible placement of K ports.
Placement random_placement(const Problem& problem, int k, Rng& rng);

/// Best of M uniform placements drawn from one stream; exactly M scorer calls.
ExpertRecord random_search(const Problem& problem, int k, int budget, std::uint64_t seed, const Scorer& scorer);

/// First ceil(K/2) genes of one parent followed by the last floor(K/2) of the other.
std::vector<int> crossover_halves(const Placement& left_parent, const Placement& right_parent);

/// crossover_halves with a fair coin deciding which parent gives the left half.
std::vector<int> crossover(const Placement& a, const Placement& b, Rng& rng);

/// Keeps the first occurrence of every feasible gene and replaces duplicate
/// or infeasible genes with uniform draws from the still-unused feasible ports.
Placement mutate_dedup(std::vector<int> genes, const Problem& problem, Rng& rng);

/// Elitism -> crossover -> mutation; every generation evaluates its whole
/// population (elites included), so exactly P0*G scorer calls.
ExpertRecord ga_solve(const Problem& problem, int k, const GaConfig& cfg, const Scorer& scorer,
                      GaTrace* trace = nullptr);

/// Best K-subset by enumeration (ascending port order). For tiny boards only.
ExpertRecord exhaustive_search(const Problem& problem, int k, const Scorer& scorer);

}  // namespace dpp::search
