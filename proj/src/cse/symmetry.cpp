// SPDX-License-Identifier: Apache-2.0

#include "dpp/cse/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "dpp/common/errors.hpp"
#include "dpp/common/parallel.hpp"
#include "dpp/nn/ops.hpp"

namespace dpp::cse {

env::Placement ap_transform(const env::Placement& placement, Rng& rng) {
  env::Placement out = placement;
  rng.shuffle(out.actions);
  return out;
}

env::Placement ap_transform(const env::Placement& placement, std::uint64_t seed) {
  Rng rng(seed);
  return ap_transform(placement, rng);
}

env::Placement apply_permutation(const env::Placement& placement, std::span<const int> perm) {
  require(perm.size() == placement.actions.size(), "apply_permutation: permutation length differs from K");
  std::vector<char> seen(perm.size(), 0);
  env::Placement out;
  for (int i : perm) {
    require(i >= 0 && static_cast<std::size_t>(i) < perm.size() && !seen[static_cast<std::size_t>(i)],
            "apply_permutation: not a permutation");
    seen[static_cast<std::size_t>(i)] = 1;
    out.actions.push_back(placement.actions[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::vector<search::ExpertRecord> augment(std::span<const search::ExpertRecord> records, int p, std::uint64_t seed) {
  require(p >= 0, "augment: P must be >= 0");
  std::vector<search::ExpertRecord> out;
  out.reserve(records.size() * static_cast<std::size_t>(p + 1));
  for (std::size_t i = 0; i < records.size(); ++i) {
    out.push_back(records[i]);
    for (int j = 0; j < p; ++j) {
      search::ExpertRecord copy = records[i];
      copy.placement = ap_transform(records[i].placement, derive_seed(seed, i * static_cast<std::uint64_t>(p + 1) +
                                                                                static_cast<std::uint64_t>(j) + 1));
      out.push_back(std::move(copy));
    }
  }
  return out;
}

OrderBiasEstimate order_bias_estimate(const PolicyFactory& make_policy, std::span<const env::Problem> problems,
                                      int k, int samples, std::uint64_t seed, int threads) {
  require(samples >= 1, "order_bias_estimate: S must be >= 1");
  require(!problems.empty(), "order_bias_estimate: no problems");
  std::vector<double> terms(static_cast<std::size_t>(samples));
  const int workers = std::max(1, std::min(threads, samples));
  // One policy per worker; slot s is always computed from seed stream s.
  parallel_for(static_cast<std::size_t>(workers), workers, [&](std::size_t w) {
    auto policy = make_policy();
    for (std::size_t s = w; s < terms.size(); s += static_cast<std::size_t>(workers)) {
      Rng rng(derive_seed(seed, s));
      const env::Problem& x = problems[rng.uniform_index(problems.size())];
      const env::Episode ep = env::run_episode(*policy, x, k, env::DecodeMode::Sample, &rng);
      const env::Placement ta = ap_transform(ep.placement, rng);
      const double lta = env::sequence_log_prob(*policy, x, ta);
      terms[s] = nn::prob_gap(ep.log_prob, lta);
    }
  });
  OrderBiasEstimate est;
  est.samples = samples;
  est.seed = seed;
  double sum = 0.0;
  for (double t : terms) sum += t;
  est.value = sum / static_cast<double>(samples);
  return est;
}

std::vector<std::vector<int>> all_permutations(int k) {
  require(k >= 0, "all_permutations: K must be >= 0");
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<int>> out;
  do {
    out.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

std::vector<env::Placement> enumerate_trajectories(const env::Problem& problem, int k) {
  const std::vector<int> free = env::feasible_actions(env::State{problem, {}});
  require(k >= 0 && k <= static_cast<int>(free.size()), "enumerate_trajectories: K exceeds the free ports");
  std::vector<env::Placement> out;
  std::vector<int> current;
  std::vector<char> used(free.size(), 0);
  std::function<void()> rec = [&] {
    if (static_cast<int>(current.size()) == k) {
      out.push_back(env::Placement{current});
      return;
    }
    for (std::size_t i = 0; i < free.size(); ++i) {
      if (used[i]) continue;
      used[i] = 1;
      current.push_back(free[i]);
      rec();
      current.pop_back();
      used[i] = 0;
    }
  };
  rec();
  return out;
}

namespace {

std::map<std::vector<int>, double> all_log_probs(env::SequencePolicy& policy, const env::Problem& problem,
                                                 const std::vector<env::Placement>& trajs) {
  std::map<std::vector<int>, double> lp;
  for (const auto& a : trajs) lp[a.actions] = env::sequence_log_prob(policy, problem, a);
  return lp;
}

}  // namespace

double order_bias_exact(env::SequencePolicy& policy, std::span<const env::Problem> problems, int k,
                        TrajectoryWeights weights) {
  require(!problems.empty(), "order_bias_exact: no problems");
  const auto perms = all_permutations(k);
  double total = 0.0;
  for (const env::Problem& x : problems) {
    const auto trajs = enumerate_trajectories(x, k);
    const auto lp = all_log_probs(policy, x, trajs);
    double bx = 0.0;
    for (const auto& a : trajs) {
      const double la = lp.at(a.actions);
      const double w = weights == TrajectoryWeights::Policy ? std::exp(la) : 1.0 / static_cast<double>(trajs.size());
      double inner = 0.0;
      for (const auto& t : perms) inner += nn::prob_gap(la, lp.at(apply_permutation(a, t).actions));
      bx += w * inner / static_cast<double>(perms.size());
    }
    total += bx;
  }
  return total / static_cast<double>(problems.size());
}

TheoremReport theorem_check(env::SequencePolicy& policy, const env::Problem& problem, int k,
                            std::span<const double> trajectory_weights) {
  const int free = env::free_port_count(problem);
  require(free <= 6 && k >= 1 && k <= 3 && k <= free,
          "theorem_check: board too large to enumerate (needs <= 6 free ports and 1 <= K <= 3)");
  const auto trajs = enumerate_trajectories(problem, k);
  std::vector<double> w(trajs.size(), 1.0 / static_cast<double>(trajs.size()));
  if (!trajectory_weights.empty()) {
    require(trajectory_weights.size() == trajs.size(), "theorem_check: one weight per trajectory required");
    double sum = 0.0;
    for (double v : trajectory_weights) {
      require(std::isfinite(v) && v > 0.0, "theorem_check: trajectory weights must be strictly positive");
      sum += v;
    }
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = trajectory_weights[i] / sum;
  }
  const auto perms = all_permutations(k);
  const auto lp = all_log_probs(policy, problem, trajs);

  TheoremReport r;
  r.trajectories = trajs.size();
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    const double la = lp.at(trajs[i].actions);
    double inner = 0.0;
    for (const auto& t : perms) {
      const env::Placement ta = apply_permutation(trajs[i], t);
      const double gap = nn::prob_gap(la, lp.at(ta.actions));
      ++r.pairs_checked;
      if (gap != 0.0) {
        if (r.unequal_pairs == 0) {
          r.witness_a = trajs[i];
          r.witness_ta = ta;
          r.witness_gap = gap;
        }
        ++r.unequal_pairs;
      }
      inner += gap;
    }
    r.order_bias += w[i] * inner / static_cast<double>(perms.size());
  }
  r.consistent = (r.order_bias == 0.0) == (r.unequal_pairs == 0);
  return r;
}

}  // namespace dpp::cse
