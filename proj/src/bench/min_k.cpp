// SPDX-License-Identifier: Apache-2.0

#include "dpp/bench/min_k.hpp"

#include <algorithm>

#include "dpp/common/errors.hpp"
#include "dpp/env/evaluate.hpp"

namespace dpp::bench {

MinKResult min_k_policy(const model::DevFormer& model, const env::Problem& problem, double target, int k_max,
                        const sim::Simulator& simulator) {
  require(k_max >= 1, "min-K: K_max must be >= 1");
  MinKResult r;
  if (target <= 0.0) {
    r.min_k = 0;
    return r;
  }
  const int k = std::min(k_max, env::free_port_count(problem));
  const env::Episode ep = model.rollout(problem, k, env::DecodeMode::Greedy, 0);
  env::Placement prefix;
  for (int t = 0; t < k; ++t) {
    prefix.actions.push_back(ep.placement.actions[static_cast<std::size_t>(t)]);
    r.score = env::evaluate(problem, prefix, simulator);
    r.placement = prefix;
    ++r.evaluations;
    if (r.score >= target) {
      r.min_k = t + 1;
      break;
    }
  }
  return r;
}

MinKResult min_k_search(const std::string& method, const env::Problem& problem, double target, int k_max,
                        int budget, std::uint64_t seed, const sim::Simulator& simulator) {
  require(k_max >= 1, "min-K: K_max must be >= 1");
  require(method == "ga" || method == "rs" || method == "exhaustive", "min-K: unknown method " + method);
  MinKResult r;
  if (target <= 0.0) {
    r.min_k = 0;
    return r;
  }
  const search::Scorer base = search::make_scorer(problem, simulator);
  int evals = 0;
  const search::Scorer scorer = [&](const env::Placement& p) {
    ++evals;
    return base(p);
  };
  const int k_cap = std::min(k_max, env::free_port_count(problem));
  for (int k = 1; k <= k_cap; ++k) {
    search::ExpertRecord best;
    if (method == "exhaustive") {
      best = search::exhaustive_search(problem, k, scorer);
    } else if (method == "rs") {
      best = search::random_search(problem, k, budget, derive_seed(seed, static_cast<std::uint64_t>(k)), scorer);
    } else {
      search::GaConfig ga = search::GaConfig::for_budget(budget, derive_seed(seed, static_cast<std::uint64_t>(k)));
      best = search::ga_solve(problem, k, ga, scorer);
    }
    r.placement = best.placement;
    r.score = best.score;
    if (best.score >= target) {
      r.min_k = k;
      break;
    }
  }
  r.evaluations = evals;
  return r;
}

}  // namespace dpp::bench
