// SPDX-License-Identifier: Apache-2.0

#include "dpp/search/search.hpp"

#include <algorithm>
#include <numeric>

#include "dpp/common/errors.hpp"
#include "dpp/env/evaluate.hpp"

namespace dpp::search {

namespace {

void require_k(const Problem& problem, int k) {
  problem.validate();
  require(k >= 0 && k <= env::free_port_count(problem), "search: K exceeds the number of free ports");
}

std::vector<int> allowed_ports(const Problem& problem) { return env::feasible_actions({problem, {}}); }

}  // namespace

Scorer make_scorer(const Problem& problem, const sim::Simulator& simulator) {
  return [&problem, &simulator](const Placement& p) { return env::evaluate(problem, p, simulator); };
}

void GaConfig::validate() const {
  require(population >= 1 && generations >= 1, "GaConfig: population and generations must be positive");
  require(elites >= 0 && elites < population, "GaConfig: elites must be < population");
}

GaConfig GaConfig::preset(int budget, std::uint64_t seed) {
  switch (budget) {
    case 100:
      return {20, 5, 4, seed};
    case 500:
      return {50, 10, 10, seed};
    default:
      throw ContractViolation("GaConfig::preset: only M=100 and M=500 have presets");
  }
}

GaConfig GaConfig::for_budget(int budget, std::uint64_t seed) {
  if (budget == 100 || budget == 500) return preset(budget, seed);
  require(budget >= 20 && budget % 20 == 0, "GaConfig: budget " + std::to_string(budget) +
                                                 " is neither a preset nor a multiple of 20");
  return {20, budget / 20, 4, seed};
}

Placement random_placement(const Problem& problem, int k, Rng& rng) {
  return {rng.sample_without_replacement(allowed_ports(problem), k)};
}

ExpertRecord random_search(const Problem& problem, int k, int budget, std::uint64_t seed, const Scorer& scorer) {
  require_k(problem, k);
  require(budget >= 1, "random_search: M must be >= 1");
  Rng rng(seed);
  const auto pool = allowed_ports(problem);
  ExpertRecord best{problem, {}, 0.0, budget, seed};
  for (int m = 0; m < budget; ++m) {
    Placement p{rng.sample_without_replacement(pool, k)};
    const double s = scorer(p);
    if (m == 0 || s > best.score) {
      best.score = s;
      best.placement = std::move(p);
    }
  }
  return best;
}

std::vector<int> crossover_halves(const Placement& left_parent, const Placement& right_parent) {
  require(left_parent.size() == right_parent.size(), "crossover: parents differ in length");
  const std::size_t k = left_parent.actions.size();
  const std::size_t left = (k + 1) / 2;
  std::vector<int> child(left_parent.actions.begin(), left_parent.actions.begin() + static_cast<std::ptrdiff_t>(left));
  child.insert(child.end(), right_parent.actions.begin() + static_cast<std::ptrdiff_t>(left), right_parent.actions.end());
  return child;
}

std::vector<int> crossover(const Placement& a, const Placement& b, Rng& rng) {
  return rng.coin() ? crossover_halves(a, b) : crossover_halves(b, a);
}

Placement mutate_dedup(std::vector<int> genes, const Problem& problem, Rng& rng) {
  const auto allowed = allowed_ports(problem);
  require(genes.size() <= allowed.size(), "mutate_dedup: fewer feasible ports than genes");
  std::vector<std::uint8_t> used(static_cast<std::size_t>(problem.n_ports()), 0);
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < genes.size(); ++i) {
    const int g = genes[i];
    const bool ok = g >= 0 && g < problem.n_ports() && problem.condition(g) == env::PortCondition::Allowed &&
                    !used[static_cast<std::size_t>(g)];
    if (ok)
      used[static_cast<std::size_t>(g)] = 1;
    else
      bad.push_back(i);
  }
  for (std::size_t i : bad) {
    std::vector<int> remaining;
    for (int p : allowed)
      if (!used[static_cast<std::size_t>(p)]) remaining.push_back(p);
    const int r = remaining[rng.uniform_index(remaining.size())];
    genes[i] = r;
    used[static_cast<std::size_t>(r)] = 1;
  }
  return {std::move(genes)};
}

ExpertRecord ga_solve(const Problem& problem, int k, const GaConfig& cfg, const Scorer& scorer, GaTrace* trace) {
  require_k(problem, k);
  cfg.validate();
  Rng rng(cfg.seed);
  const auto pool = allowed_ports(problem);

  struct Individual {
    Placement genes;
    double score = 0.0;
  };
  std::vector<Individual> population(static_cast<std::size_t>(cfg.population));
  for (auto& ind : population) ind.genes.actions = rng.sample_without_replacement(pool, k);

  ExpertRecord best{problem, {}, 0.0, cfg.budget(), cfg.seed};
  bool have_best = false;
  int evaluations = 0;
  if (trace) trace->best_per_generation.clear();

  for (int gen = 0; gen < cfg.generations; ++gen) {
    if (gen > 0) {
      // Elitism: population is sorted best-first from the previous round.
      std::vector<Individual> next(population.begin(), population.begin() + cfg.elites);
      while (static_cast<int>(next.size()) < cfg.population) {
        const auto& a = population[rng.uniform_index(population.size())];
        const auto& b = population[rng.uniform_index(population.size())];
        next.push_back({mutate_dedup(crossover(a.genes, b.genes, rng), problem, rng), 0.0});
      }
      population = std::move(next);
    }
    for (auto& ind : population) {
      ind.score = scorer(ind.genes);
      ++evaluations;
      if (!have_best || ind.score > best.score) {
        best.score = ind.score;
        best.placement = ind.genes;
        have_best = true;
      }
    }
    std::stable_sort(population.begin(), population.end(),
                     [](const Individual& x, const Individual& y) { return x.score > y.score; });
    if (trace) trace->best_per_generation.push_back(best.score);
  }
  if (trace) trace->evaluations = evaluations;
  return best;
}

ExpertRecord exhaustive_search(const Problem& problem, int k, const Scorer& scorer) {
  require_k(problem, k);
  const auto pool = allowed_ports(problem);
  const int n = static_cast<int>(pool.size());
  ExpertRecord best{problem, {}, 0.0, 0, 0};
  std::vector<int> idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), 0);
  bool first = true;
  for (;;) {
    Placement p;
    for (int i : idx) p.actions.push_back(pool[static_cast<std::size_t>(i)]);
    const double s = scorer(p);
    ++best.budget;
    if (first || s > best.score) {
      best.score = s;
      best.placement = std::move(p);
      first = false;
    }
    // Next combination in lexicographic order.
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
  return best;
}

}  // namespace dpp::search
