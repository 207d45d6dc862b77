// SPDX-License-Identifier: Apache-2.0

#include "dpp/env/policy.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "dpp/common/errors.hpp"

namespace dpp::env {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

int sample_index(const std::vector<double>& log_probs, Rng& rng) {
  double max_lp = kNegInf;
  for (double lp : log_probs) max_lp = std::max(max_lp, lp);
  double total = 0.0;
  for (double lp : log_probs) total += lp == kNegInf ? 0.0 : std::exp(lp - max_lp);
  const double u = rng.uniform01() * total;
  double acc = 0.0;
  int last = -1;
  for (std::size_t i = 0; i < log_probs.size(); ++i) {
    if (log_probs[i] == kNegInf) continue;
    acc += std::exp(log_probs[i] - max_lp);
    last = static_cast<int>(i);
    if (u < acc) return last;
  }
  return last;
}

int argmax_lowest(const std::vector<double>& log_probs) {
  int best = -1;
  for (std::size_t i = 0; i < log_probs.size(); ++i)
    if (log_probs[i] != kNegInf && (best < 0 || log_probs[i] > log_probs[static_cast<std::size_t>(best)]))
      best = static_cast<int>(i);
  return best;
}

}  // namespace

void check_mask_contract(const State& state, const std::vector<double>& log_probs) {
  require(static_cast<int>(log_probs.size()) == state.problem.n_ports(),
          "policy returned a distribution of the wrong size");
  const auto mask = feasibility_mask(state.problem, state.chosen);
  for (std::size_t i = 0; i < log_probs.size(); ++i) {
    if (!mask[i] && log_probs[i] != kNegInf) {
      std::ostringstream msg;
      msg << "policy assigned probability to infeasible port " << i;
      throw ContractViolation(msg.str());
    }
    if (mask[i] && std::isnan(log_probs[i])) throw NumericError("policy produced NaN log-probability");
  }
}

Episode run_episode(SequencePolicy& policy, const Problem& problem, int k, DecodeMode mode, Rng* rng) {
  require(k >= 0 && k <= free_port_count(problem), "run_episode: K exceeds the free ports");
  require(mode == DecodeMode::Greedy || rng != nullptr, "run_episode: sampling needs a generator");
  State state{problem, {}};
  Episode ep;
  for (int t = 0; t < k; ++t) {
    const auto lp = policy.next_log_probs(state);
    check_mask_contract(state, lp);
    const int a = mode == DecodeMode::Greedy ? argmax_lowest(lp) : sample_index(lp, *rng);
    require(a >= 0, "run_episode: no feasible action");
    ep.log_prob += lp[static_cast<std::size_t>(a)];
    state = step(std::move(state), a);
  }
  ep.placement.actions = std::move(state.chosen);
  return ep;
}

double sequence_log_prob(SequencePolicy& policy, const Problem& problem, const Placement& placement) {
  validate_placement(problem, placement);
  State state{problem, {}};
  double total = 0.0;
  for (int a : placement.actions) {
    const auto lp = policy.next_log_probs(state);
    check_mask_contract(state, lp);
    total += lp[static_cast<std::size_t>(a)];
    state = step(std::move(state), a);
  }
  return total;
}

std::vector<double> UniformPolicy::next_log_probs(const State& state) {
  const auto mask = feasibility_mask(state.problem, state.chosen);
  int m = 0;
  for (auto v : mask) m += v;
  require(m > 0, "UniformPolicy: no feasible port");
  const double lp = -std::log(static_cast<double>(m));
  std::vector<double> out(mask.size(), kNegInf);
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) out[i] = lp;
  return out;
}

}  // namespace dpp::env
