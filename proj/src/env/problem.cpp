// SPDX-License-Identifier: Apache-2.0

#include "dpp/env/problem.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "dpp/common/errors.hpp"
#include "dpp/common/hash.hpp"

namespace dpp::env {

PortCondition Problem::condition(int port) const {
  if (port == probe) return PortCondition::Probe;
  return is_keepout(port) ? PortCondition::KeepOut : PortCondition::Allowed;
}

bool Problem::is_keepout(int port) const { return std::binary_search(keepout.begin(), keepout.end(), port); }

void Problem::validate() const {
  require(n_rows >= 1 && n_cols >= 1, "Problem: grid dimensions must be positive");
  require(probe >= 0 && probe < n_ports(), "Problem: probe out of range");
  for (std::size_t i = 0; i < keepout.size(); ++i) {
    require(keepout[i] >= 0 && keepout[i] < n_ports(), "Problem: keep-out port out of range");
    require(keepout[i] != probe, "Problem: keep-out contains the probe");
    if (i > 0) require(keepout[i] > keepout[i - 1], "Problem: keep-out must be sorted and unique");
  }
}

std::uint64_t Problem::canonical_hash() const {
  std::ostringstream s;
  s << n_rows << 'x' << n_cols << ':' << probe << ':';
  for (int k : keepout) s << k << ',';
  return fnv1a64(s.str());
}

void validate_placement(const Problem& problem, const Placement& placement) {
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(problem.n_ports()), 0);
  for (int a : placement.actions) {
    require(a >= 0 && a < problem.n_ports(), "Placement: port out of range");
    require(problem.condition(a) == PortCondition::Allowed, "Placement: port is the probe or keep-out");
    require(!seen[static_cast<std::size_t>(a)], "Placement: duplicate port");
    seen[static_cast<std::size_t>(a)] = 1;
  }
}

std::vector<std::uint8_t> feasibility_mask(const Problem& problem, std::span<const int> chosen) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(problem.n_ports()), 1);
  mask[static_cast<std::size_t>(problem.probe)] = 0;
  for (int k : problem.keepout) mask[static_cast<std::size_t>(k)] = 0;
  for (int c : chosen) {
    require(c >= 0 && c < problem.n_ports(), "feasibility_mask: chosen port out of range");
    mask[static_cast<std::size_t>(c)] = 0;
  }
  return mask;
}

std::vector<int> feasible_actions(const State& state) {
  const auto mask = feasibility_mask(state.problem, state.chosen);
  std::vector<int> out;
  for (int p = 0; p < state.problem.n_ports(); ++p)
    if (mask[static_cast<std::size_t>(p)]) out.push_back(p);
  return out;
}

State step(State state, int action) {
  const auto mask = feasibility_mask(state.problem, state.chosen);
  if (action < 0 || action >= state.problem.n_ports() || !mask[static_cast<std::size_t>(action)]) {
    std::ostringstream msg;
    msg << "step: action " << action << " is not feasible";
    throw ContractViolation(msg.str());
  }
  state.chosen.push_back(action);
  return state;
}

int free_port_count(const Problem& problem) {
  return problem.n_ports() - 1 - static_cast<int>(problem.keepout.size());
}

std::pair<double, double> normalized_position(const Problem& problem, int port) {
  const double x = problem.n_cols > 1 ? static_cast<double>(problem.col_of(port)) / (problem.n_cols - 1) : 0.0;
  const double y = problem.n_rows > 1 ? static_cast<double>(problem.row_of(port)) / (problem.n_rows - 1) : 0.0;
  return {x, y};
}

NodeFeatures encode_features(const Problem& problem) {
  problem.validate();
  NodeFeatures f = NodeFeatures::Zero(problem.n_ports(), kNodeFeatureDim);
  for (int p = 0; p < problem.n_ports(); ++p) {
    const auto [x, y] = normalized_position(problem, p);
    f(p, 0) = x;
    f(p, 1) = y;
    f(p, 2 + static_cast<int>(problem.condition(p))) = 1.0;
  }
  return f;
}

Problem gen_problem(Rng& rng, int n_rows, int n_cols, int keepout_max) {
  require(n_rows >= 1 && n_cols >= 1, "gen_problem: grid dimensions must be positive");
  const int n = n_rows * n_cols;
  require(keepout_max >= 0 && keepout_max < n - 1, "gen_problem: keepout_max must be < ports - 1");
  Problem p;
  p.n_rows = n_rows;
  p.n_cols = n_cols;
  p.probe = rng.uniform_int(n);
  const int count = rng.uniform_int(keepout_max + 1);
  std::vector<int> pool;
  pool.reserve(static_cast<std::size_t>(n - 1));
  for (int i = 0; i < n; ++i)
    if (i != p.probe) pool.push_back(i);
  p.keepout = rng.sample_without_replacement(pool, count);
  std::sort(p.keepout.begin(), p.keepout.end());
  return p;
}

Problem gen_problem(std::uint64_t seed, int n_rows, int n_cols, int keepout_max) {
  Rng rng(seed);
  return gen_problem(rng, n_rows, n_cols, keepout_max);
}

std::vector<std::vector<Problem>> generate_disjoint_sets(std::uint64_t seed, const ProblemSetSpec& spec,
                                                         std::span<const int> counts,
                                                         std::span<const std::uint64_t> exclude) {
  Rng rng(seed);
  std::unordered_set<std::uint64_t> used(exclude.begin(), exclude.end());
  std::vector<std::vector<Problem>> out(counts.size());
  constexpr int kMaxRejectsPerProblem = 100000;
  for (std::size_t s = 0; s < counts.size(); ++s) {
    require(counts[s] >= 0, "generate_disjoint_sets: negative count");
    while (static_cast<int>(out[s].size()) < counts[s]) {
      int rejects = 0;
      for (;;) {
        Problem p = gen_problem(rng, spec.n_rows, spec.n_cols, spec.keepout_max);
        if (used.insert(p.canonical_hash()).second) {
          out[s].push_back(std::move(p));
          break;
        }
        if (++rejects > kMaxRejectsPerProblem)
          throw ContractViolation("generate_disjoint_sets: problem space exhausted");
      }
    }
  }
  return out;
}

}  // namespace dpp::env
