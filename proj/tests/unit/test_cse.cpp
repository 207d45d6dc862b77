// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "dpp/common/errors.hpp"
#include "dpp/cse/losses.hpp"
#include "dpp/cse/symmetry.hpp"
#include "dpp/cse/trainer.hpp"
#include "dpp/env/evaluate.hpp"
#include "dpp/nn/adam.hpp"
#include "dpp/nn/ops.hpp"
#include "oracles.hpp"
#include "toy.hpp"

using namespace dpp;
using model::DevFormer;
using model::ModelConfig;

TEST_CASE("explicit permutations") {
  const env::Placement a{{7, 3, 5}};
  const std::vector<int> perm{2, 0, 1};
  CHECK(cse::apply_permutation(a, perm).actions == std::vector<int>{5, 7, 3});
  CHECK(cse::all_permutations(3).size() == 6);
  const auto t = cse::ap_transform(a, 11);
  CHECK(std::is_permutation(t.actions.begin(), t.actions.end(), a.actions.begin()));
}

TEST_CASE("augmentation keeps every copy's score") {
  const sim::Simulator simr(sim::PdnConfig::chip_only(4, 4));
  const auto ds = search::build_expert_dataset(6, env::ProblemSetSpec{4, 4, 3}, 4, search::GaConfig::preset(100), 3, simr);
  const auto aug = cse::augment(ds.records, 4, 17);
  REQUIRE(aug.size() == 30);
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    const auto& orig = ds.records[i];
    CHECK(aug[i * 5].placement == orig.placement);
    for (int j = 0; j < 5; ++j) {
      const auto& c = aug[i * 5 + j];
      CHECK(c.problem == orig.problem);
      CHECK(std::is_permutation(c.placement.actions.begin(), c.placement.actions.end(), orig.placement.actions.begin()));
      CHECK(env::evaluate(c.problem, c.placement, simr) == orig.score);
    }
  }
  CHECK(cse::augment(ds.records, 0, 1).size() == 6);
}

TEST_CASE("order bias of the uniform policy is exactly zero") {
  const auto factory = [] { return std::make_unique<testing::UniformPolicy>(); };
  Rng rng(1);
  std::vector<env::Problem> probs;
  for (int i = 0; i < 5; ++i) probs.push_back(env::gen_problem(rng, 4, 4, 5));
  for (std::uint64_t seed : {0u, 1u, 99u})
    for (int s : {1, 17, 200}) CHECK(cse::order_bias_estimate(factory, probs, 3, s, seed).value == 0.0);
}

TEST_CASE("order bias estimate converges to the exact value and ignores thread count") {
  const auto board = testing::four_port_board();
  testing::LowIndexPolicy pi(1.0);
  const double exact = testing::order_bias_oracle(pi, board, 2);
  const std::vector<env::Problem> probs{board};
  const auto factory = [] { return std::make_unique<testing::LowIndexPolicy>(1.0); };
  const auto one = cse::order_bias_estimate(factory, probs, 2, 20000, 5, 1);
  const auto two = cse::order_bias_estimate(factory, probs, 2, 20000, 5, 3);
  CHECK(one.value == two.value);
  CHECK(std::abs(one.value - exact) < 0.05 * exact);
}

TEST_CASE("theorem check in both directions") {
  const auto board = testing::four_port_board();
  testing::UniformPolicy sym;
  const auto r0 = cse::theorem_check(sym, board, 2);
  CHECK(r0.order_bias == 0.0);
  CHECK(r0.unequal_pairs == 0);
  CHECK(r0.trajectories == 12);
  CHECK(r0.consistent);

  testing::LowIndexPolicy asym;
  const auto r1 = cse::theorem_check(asym, board, 2);
  CHECK(r1.order_bias > 0.0);
  CHECK(r1.unequal_pairs > 0);
  CHECK(r1.consistent);
  CHECK(testing::trajectory_prob(asym, board, r1.witness_a.actions) !=
        testing::trajectory_prob(asym, board, r1.witness_ta.actions));

  std::vector<double> w(12, 1.0);
  w[3] = 0.0;
  CHECK_THROWS_AS(cse::theorem_check(sym, board, 2, w), ContractViolation);
  CHECK_THROWS_AS(cse::theorem_check(sym, env::Problem{3, 3, 0, {}}, 2), ContractViolation);
}

namespace {

struct Batch {
  std::vector<env::Problem> problems;
  std::vector<env::Placement> labels;
  std::vector<const env::Problem*> pp;
  std::vector<const env::Placement*> pl;
};

Batch make_batch(const DevFormer& m, int n, std::uint64_t seed) {
  Batch b;
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    b.problems.push_back(env::gen_problem(rng, 4, 4, 3));
    b.labels.push_back(m.rollout(b.problems.back(), 3, env::DecodeMode::Sample, seed + i).placement);
  }
  for (int i = 0; i < n; ++i) {
    b.pp.push_back(&b.problems[i]);
    b.pl.push_back(&b.labels[i]);
  }
  return b;
}

}  // namespace

TEST_CASE("self loss is zero for an identical copy and identity transforms") {
  DevFormer m(ModelConfig::toy(), 4);
  const DevFormer frozen = m;
  const auto b = make_batch(m, 6, 2);
  std::vector<cse::SelfSample> samples;
  for (int i = 0; i < 6; ++i) samples.push_back({b.problems[i], b.labels[i], b.labels[i]});
  nn::Graph g;
  nn::Binder p(g, m.params(), true);
  CHECK(g.scalar(cse::self_loss(m, p, frozen, samples)) == 0.0);

  const auto drawn = cse::sample_self_batch(frozen, b.problems, 3, 8);
  nn::Graph g2;
  nn::Binder p2(g2, m.params(), true);
  const nn::Var l = cse::self_loss(m, p2, frozen, drawn);
  CHECK(g2.scalar(l) >= 0.0);
  nn::Var e = cse::expert_loss(m, p2, b.pp, b.pl);
  nn::Var zero = g2.constant(nn::Matrix::Zero(1, 1));
  CHECK(g2.scalar(cse::total_loss(g2, e, zero, 5e32)) == g2.scalar(e));
}

TEST_CASE("no gradient reaches the frozen copy") {
  DevFormer m(ModelConfig::toy(), 4);
  DevFormer frozen = m;
  const auto b = make_batch(m, 6, 3);
  const auto drawn = cse::sample_self_batch(frozen, b.problems, 3, 9);
  for (double bump : {0.0, 1e-3}) {
    frozen.params().at("dec.query.W").value(0, 0) += bump;
    frozen.params().zero_grad();
    m.params().zero_grad();
    nn::Graph g;
    nn::Binder p(g, m.params(), true);
    g.backward(cse::self_loss(m, p, frozen, drawn));
    for (std::size_t i = 0; i < frozen.params().size(); ++i) {
      const auto& t = frozen.params().tensor(i);
      CHECK((t.grad.size() == 0 || t.grad.isZero(0.0)));
    }
  }
}

TEST_CASE("one optimiser step on the expert loss reduces it") {
  DevFormer m(ModelConfig::toy(), 6);
  const auto b = make_batch(DevFormer(ModelConfig::toy(), 99), 8, 4);
  auto loss_value = [&] {
    nn::Graph g;
    nn::Binder p(g, m.params(), true, false);
    return g.scalar(cse::expert_loss(m, p, b.pp, b.pl));
  };
  const double before = loss_value();
  nn::Graph g;
  nn::Binder p(g, m.params(), true, false);
  m.params().zero_grad();
  g.backward(cse::expert_loss(m, p, b.pp, b.pl));
  nn::Adam opt(nn::AdamConfig{1e-3});
  opt.step(m.params());
  CHECK(loss_value() < before);
}

TEST_CASE("train config presets and JSON") {
  const auto full = cse::TrainConfig::full();
  CHECK(full.n_train == 2000);
  CHECK(full.batch == 100);
  CHECK(full.lr == 1e-5);
  CHECK(full.perms == 4);
  CHECK(full.lambda_eff == 5e32);
  CHECK(cse::TrainConfig::from_json(full.to_json()).to_json() == full.to_json());
  auto bad = full;
  bad.batch = 1;
  CHECK_THROWS_AS(bad.validate(), ContractViolation);
}

TEST_CASE("toy training run: NLL halves, reload reproduces the validation score") {
  const sim::Simulator simr(testing::toy_pdn());
  const auto toy = testing::make_toy_setup(0, simr, 50, 20);
  const auto cfg = cse::TrainConfig::toy();
  const auto res = cse::train(DevFormer(ModelConfig::toy(), 1000), toy.dataset.records, toy.validation, cfg, simr);
  REQUIRE(res.log.size() >= 2);
  CHECK(res.log.back().train_nll <= 0.5 * res.log.front().train_nll);
  CHECK(res.epochs <= 30);
  CHECK(std::isfinite(res.log.back().self_loss));
  CHECK(res.log.back().order_bias >= 0.0);

  const auto path = std::filesystem::temp_directory_path() / "dpp_test_train.ckpt";
  res.best.save(path);
  const auto loaded = DevFormer::load(path);
  CHECK(cse::greedy_mean_score(loaded.model, toy.validation, 4, simr) == res.best_val_j);
  std::filesystem::remove(path);

  const std::string csv = cse::train_log_csv(res.log);
  CHECK(csv.rfind("step,train_nll,self_loss,val_J,order_bias\n", 0) == 0);
}

TEST_CASE("training refuses validation problems in the training set") {
  const sim::Simulator simr(testing::toy_pdn());
  const auto toy = testing::make_toy_setup(1, simr, 4, 2);
  std::vector<env::Problem> leaky = toy.validation;
  leaky.push_back(toy.dataset.records[0].problem);
  auto cfg = cse::TrainConfig::toy();
  cfg.batch = 4;
  CHECK_THROWS_AS(cse::train(DevFormer(ModelConfig::toy(), 1), toy.dataset.records, leaky, cfg, simr), ContractViolation);
}

TEST_CASE("a diverging run stops with a numeric error and a state dump") {
  const sim::Simulator simr(testing::toy_pdn());
  const auto toy = testing::make_toy_setup(2, simr, 8, 2);
  auto cfg = cse::TrainConfig::toy();
  cfg.batch = 8;
  cfg.lr = 1e300;
  cfg.lambda_eff = 0;
  cfg.max_steps = 5;
  const auto dump = std::filesystem::temp_directory_path() / "dpp_test_diag.json";
  std::filesystem::remove(dump);
  CHECK_THROWS_AS(cse::train(DevFormer(ModelConfig::toy(), 1), toy.dataset.records, toy.validation, cfg, simr, dump),
                  NumericError);
  CHECK(std::filesystem::exists(dump));
  std::filesystem::remove(dump);
}
