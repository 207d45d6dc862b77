// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>

#include "dpp/common/errors.hpp"
#include "dpp/model/devformer.hpp"
#include "dpp/nn/grad_check.hpp"
#include "dpp/nn/ops.hpp"
#include "oracles.hpp"

using namespace dpp;
using model::DevFormer;
using model::ModelConfig;

TEST_CASE("probe-relative features") {
  const env::Problem p{3, 3, 0, {}};
  const auto n = model::ppe_features(p, model::PpeMode::Norm);
  CHECK(n(8, 0) == Catch::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(n(0, 0) == 0.0);
  CHECK(n(1, 0) == 0.5);
  const auto d = model::ppe_features(p, model::PpeMode::DeltaAndNorm);
  CHECK(d(5, 0) == 1.0);
  CHECK(d(5, 1) == 0.5);
}

TEST_CASE("model config validation and JSON round-trip") {
  ModelConfig c = ModelConfig::toy();
  CHECK(ModelConfig::from_json(c.to_json()).to_json() == c.to_json());
  c.n_heads = 3;
  CHECK_THROWS_AS(c.validate(), ContractViolation);
  const auto a = ModelConfig{}.ablated();
  CHECK_FALSE(a.use_ppe);
  CHECK_FALSE(a.use_pcn);
  CHECK_FALSE(a.use_rcn);
}

TEST_CASE("rollouts never put mass on infeasible ports") {
  for (const auto& cfg : {ModelConfig::toy(), ModelConfig::toy().ablated()}) {
    const DevFormer m(cfg, 3);
    Rng rng(4);
    for (int i = 0; i < 30; ++i) {
      const auto p = env::gen_problem(rng, 4, 4, 6);
      const int k = std::min(5, env::free_port_count(p));
      model::DevFormerPolicy pi(m);
      env::State s{p, {}};
      for (int t = 0; t < k; ++t) {
        const auto lp = pi.next_log_probs(s);
        const auto feas = env::feasibility_mask(p, s.chosen);
        double total = 0;
        for (int port = 0; port < p.n_ports(); ++port) {
          if (!feas[port]) REQUIRE(std::exp(lp[port]) == 0.0);
          total += std::exp(lp[port]);
        }
        CHECK(total == Catch::Approx(1.0).epsilon(1e-12));
        double u = rng.uniform01() * total;
        int pick = -1;
        for (int port = 0; port < p.n_ports() && u >= 0; ++port)
          if (feas[port]) {
            pick = port;
            u -= std::exp(lp[port]);
          }
        s.chosen.push_back(pick);
      }
    }
  }
}

TEST_CASE("batched teacher forcing agrees with step-wise decoding") {
  const DevFormer m(ModelConfig::toy(), 5);
  Rng rng(6);
  std::vector<env::Problem> probs;
  std::vector<env::Placement> pls;
  for (int i = 0; i < 5; ++i) {
    probs.push_back(env::gen_problem(rng, 4, 4, 4));
    pls.push_back(m.rollout(probs.back(), 4, env::DecodeMode::Sample, i).placement);
  }
  std::vector<const env::Problem*> pp;
  std::vector<const env::Placement*> pl;
  for (int i = 0; i < 5; ++i) {
    pp.push_back(&probs[i]);
    pl.push_back(&pls[i]);
  }
  nn::Graph g;
  auto b = nn::Binder::frozen(g, m.params());
  const auto v = g.value(m.sequence_log_probs(b, pp, pl, nn::BnMode::Eval));
  for (int i = 0; i < 5; ++i) CHECK(std::abs(v(i, 0) - m.log_prob(probs[i], pls[i])) <= 1e-12 * std::abs(v(i, 0)));
}

TEST_CASE("infeasible teacher labels are rejected") {
  const DevFormer m(ModelConfig::toy(), 5);
  const env::Problem p{3, 3, 4, {0}};
  CHECK_THROWS_AS(m.log_prob(p, env::Placement{{0, 1}}), ContractViolation);
  CHECK_THROWS_AS(m.log_prob(p, env::Placement{{1, 1}}), ContractViolation);
}

TEST_CASE("model is size agnostic") {
  const DevFormer m(ModelConfig::toy(), 1);
  for (int n : {3, 6, 9}) {
    const env::Problem p{n, n, 0, {}};
    const auto ep = m.rollout(p, 2, env::DecodeMode::Greedy, 0);
    env::validate_placement(p, ep.placement);
  }
}

TEST_CASE("gradient check on the smallest model with ablations") {
  auto cfg = ModelConfig::gradcheck_toy();
  cfg.ppe_mode = model::PpeMode::DeltaAndNorm;
  cfg.use_rcn = false;
  const DevFormer m0(cfg, 2);
  DevFormer m = m0;
  const env::Problem a{3, 3, 4, {0}}, b{3, 3, 1, {}};
  const env::Placement la{{2, 6}}, lb{{8, 3}};
  std::vector<const env::Problem*> pp{&a, &b};
  std::vector<const env::Placement*> pl{&la, &lb};
  const auto r = nn::grad_check(
      [&](nn::Graph& g, nn::ParamStore& s) {
        nn::Binder p(g, s, true);
        return nn::scale(g, nn::mean_all(g, m.sequence_log_probs(p, pp, pl, nn::BnMode::Train)), -1.0);
      },
      m.params());
  CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("checkpoints round-trip bit-exactly and check the config hash") {
  const DevFormer m(ModelConfig::toy(), 9);
  const auto path = std::filesystem::temp_directory_path() / "dpp_test_model.ckpt";
  const nlohmann::json extra{{"note", "x"}};
  m.save(path, extra);
  const auto l = DevFormer::load(path, m.config_hash(extra));
  CHECK(l.model.params().identical_to(m.params()));
  CHECK(l.extra == extra);
  const env::Problem p{4, 4, 3, {1}};
  CHECK(l.model.rollout(p, 3, env::DecodeMode::Sample, 4).placement == m.rollout(p, 3, env::DecodeMode::Sample, 4).placement);
  CHECK_THROWS_AS(DevFormer::load(path, m.config_hash(extra) ^ 1), ContractViolation);
  CHECK_THROWS_AS(DevFormer::load(path.string() + ".missing"), IoError);
  std::filesystem::remove(path);

  nn::ParamStore wrong = m.params();
  wrong.at("dec.query.W").value(0, 0) = std::nan("");
  CHECK_THROWS_AS(DevFormer(m.config(), wrong), ContractViolation);
}
