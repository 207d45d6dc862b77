// SPDX-License-Identifier: Apache-2.0

#include "dpp/cse/losses.hpp"

#include "dpp/common/errors.hpp"
#include "dpp/common/parallel.hpp"
#include "dpp/cse/symmetry.hpp"

namespace dpp::cse {

nn::Var expert_loss(const model::DevFormer& model, nn::Binder& p, const std::vector<const env::Problem*>& problems,
                    const std::vector<const env::Placement*>& labels) {
  nn::Graph& g = p.graph();
  nn::Var lp = model.sequence_log_probs(p, problems, labels, nn::BnMode::Train);
  return nn::scale(g, nn::mean_all(g, lp), -1.0);
}

std::vector<SelfSample> sample_self_batch(const model::DevFormer& frozen, const std::vector<env::Problem>& problems,
                                          int k, std::uint64_t seed, int transforms, int threads) {
  require(transforms >= 1, "sample_self_batch: transforms must be >= 1");
  std::vector<std::vector<SelfSample>> per(problems.size());
  parallel_for(problems.size(), threads, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    model::DevFormerPolicy policy(frozen);
    const env::Episode ep = env::run_episode(policy, problems[i], k, env::DecodeMode::Sample, &rng);
    for (int j = 0; j < transforms; ++j)
      per[i].push_back(SelfSample{problems[i], ep.placement, ap_transform(ep.placement, rng)});
  });
  std::vector<SelfSample> out;
  for (auto& v : per)
    for (auto& s : v) out.push_back(std::move(s));
  return out;
}

nn::Var self_loss(const model::DevFormer& model, nn::Binder& p, const model::DevFormer& frozen,
                  const std::vector<SelfSample>& samples) {
  require(!samples.empty(), "self_loss: empty batch");
  std::vector<const env::Problem*> probs;
  std::vector<const env::Placement*> sampled, transformed;
  for (const auto& s : samples) {
    probs.push_back(&s.problem);
    sampled.push_back(&s.sampled);
    transformed.push_back(&s.transformed);
  }
  nn::Matrix target;
  {
    nn::Graph fg;
    nn::Binder fp = nn::Binder::frozen(fg, frozen.params());
    target = fg.value(frozen.sequence_log_probs(fp, probs, sampled, nn::BnMode::Eval));
  }
  nn::Graph& g = p.graph();
  nn::Var lp = model.sequence_log_probs(p, probs, transformed, nn::BnMode::Eval);
  return nn::mean_all(g, nn::prob_l1_gap(g, lp, target));
}

nn::Var total_loss(nn::Graph& g, nn::Var expert, nn::Var self, double lambda_eff) {
  return nn::add(g, expert, nn::scale(g, self, lambda_eff));
}

}  // namespace dpp::cse
