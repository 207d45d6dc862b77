// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "dpp/common/errors.hpp"
#include "dpp/env/evaluate.hpp"
#include "dpp/env/policy.hpp"
#include "dpp/env/problem_io.hpp"
#include "oracles.hpp"

using namespace dpp;
using env::Problem;

TEST_CASE("problem validation") {
  CHECK_NOTHROW(Problem{3, 3, 4, {0, 8}}.validate());
  CHECK_THROWS_AS((Problem{3, 3, 4, {4}}.validate()), ContractViolation);
  CHECK_THROWS_AS((Problem{3, 3, 4, {8, 0}}.validate()), ContractViolation);
  CHECK_THROWS_AS((Problem{3, 3, 9, {}}.validate()), ContractViolation);
}

TEST_CASE("feasible actions exclude probe, keep-out and chosen ports") {
  const Problem p{2, 3, 1, {4}};
  env::State s{p, {0}};
  CHECK(env::feasible_actions(s) == std::vector<int>{2, 3, 5});
  CHECK(env::free_port_count(p) == 4);
  CHECK_THROWS_AS(env::step(s, 4), ContractViolation);
  CHECK_THROWS_AS(env::step(s, 0), ContractViolation);
  CHECK(env::step(s, 5).chosen == std::vector<int>{0, 5});
}

TEST_CASE("node features hold position and one-hot condition") {
  const Problem p{2, 3, 5, {0}};
  const auto f = env::encode_features(p);
  REQUIRE(f.rows() == 6);
  REQUIRE(f.cols() == env::kNodeFeatureDim);
  CHECK(f(5, 0) == 1.0);
  CHECK(f(5, 1) == 1.0);
  CHECK(f(1, 0) == 0.5);
  CHECK(f(0, 3) == 1.0);
  CHECK(f(5, 4) == 1.0);
  CHECK(f(2, 2) == 1.0);
  for (int i = 0; i < 6; ++i) CHECK(f(i, 2) + f(i, 3) + f(i, 4) == 1.0);
}

TEST_CASE("generated problems are valid and disjoint across splits") {
  const std::vector<int> counts{30, 20, 20};
  const auto sets = env::generate_disjoint_sets(5, env::ProblemSetSpec{3, 3, 3}, counts);
  std::set<std::uint64_t> seen;
  for (const auto& split : sets)
    for (const auto& p : split) {
      p.validate();
      CHECK((int)p.keepout.size() <= 3);
      CHECK(seen.insert(p.canonical_hash()).second);
    }
  CHECK(seen.size() == 70);
  const auto again = env::generate_disjoint_sets(5, env::ProblemSetSpec{3, 3, 3}, counts);
  CHECK(again == sets);
}

TEST_CASE("problem sets round-trip through JSON") {
  const std::vector<int> counts{5};
  const auto ps = env::generate_disjoint_sets(2, env::ProblemSetSpec{4, 4, 5}, counts)[0];
  const auto path = std::filesystem::temp_directory_path() / "dpp_test_problems.json";
  env::write_problem_set(path, ps);
  CHECK(env::read_problem_set(path) == ps);
  std::filesystem::remove(path);
}

TEST_CASE("episodes under the uniform policy are valid and probabilities factorise") {
  testing::UniformPolicy pi;
  const Problem p{3, 3, 4, {0}};
  Rng rng(1);
  const auto ep = env::run_episode(pi, p, 3, env::DecodeMode::Sample, &rng);
  env::validate_placement(p, ep.placement);
  CHECK(ep.log_prob == Catch::Approx(-std::log(7.0 * 6 * 5)).epsilon(1e-14));
  CHECK(env::sequence_log_prob(pi, p, ep.placement) == Catch::Approx(ep.log_prob).epsilon(1e-14));
  const auto g = env::run_episode(pi, p, 2, env::DecodeMode::Greedy);
  CHECK(g.placement.actions == std::vector<int>{1, 2});
}

TEST_CASE("a policy putting mass on an infeasible port is caught") {
  struct Leaky final : env::SequencePolicy {
    std::vector<double> next_log_probs(const env::State& s) override {
      return std::vector<double>(s.problem.n_ports(), -std::log(double(s.problem.n_ports())));
    }
  } leaky;
  CHECK_THROWS_AS(env::run_episode(leaky, Problem{2, 2, 0, {}}, 1, env::DecodeMode::Greedy), ContractViolation);
}

TEST_CASE("evaluate rejects infeasible placements") {
  const sim::Simulator simr(sim::PdnConfig::chip_only(3, 3));
  const Problem p{3, 3, 4, {0}};
  CHECK_THROWS_AS(env::evaluate(p, env::Placement{{0}}, simr), ContractViolation);
  CHECK_THROWS_AS(env::evaluate(p, env::Placement{{1, 1}}, simr), ContractViolation);
  CHECK(env::evaluate(p, env::Placement{{1, 2}}, simr) == simr.score(3, 3, 4, std::vector<int>{1, 2}));
}
