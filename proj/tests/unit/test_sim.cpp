// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dpp/common/errors.hpp"
#include "dpp/common/rng.hpp"
#include "dpp/sim/reduction.hpp"
#include "dpp/sim/simulator.hpp"
#include "oracles.hpp"

using namespace dpp;

namespace {

double max_rel(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]) / std::abs(b[i]));
  return m;
}

}  // namespace

TEST_CASE("frequency grid spans 200 MHz to 20 GHz in 201 points") {
  const auto g = sim::default_freq_grid();
  REQUIRE(g.size() == 201);
  CHECK(g.points_hz.front() == 2e8);
  CHECK(g.points_hz.back() == 2e10);
  CHECK(g.points_hz[1] - g.points_hz[0] == Catch::Approx(99e6).epsilon(1e-12));
}

TEST_CASE("decap impedance is r + jwl + 1/(jwc)") {
  const sim::DecapModel d{0.01, 1e-12, 1e-9};
  const double f = 1e9, w = 2 * M_PI * f;
  const auto z = sim::decap_impedance(d, f);
  CHECK(z.real() == Catch::Approx(0.01));
  CHECK(z.imag() == Catch::Approx(w * 1e-12 - 1 / (w * 1e-9)).epsilon(1e-12));
}

TEST_CASE("single cell chip has the closed-form shunt impedance") {
  sim::StackSpec s;
  s.chip = {1, 1, sim::UnitCellParams::chip_default()};
  const sim::FreqGrid grid = sim::make_freq_grid(5, 1e9, 5e9);
  const int port = 0;
  const auto z = sim::solve_z_ports(s, std::span<const int>(&port, 1), grid);
  for (std::size_t f = 0; f < grid.size(); ++f) {
    const double w = 2 * M_PI * grid.points_hz[f];
    const std::complex<double> y(s.chip.cell.conductance_siemens, w * s.chip.cell.capacitance_farad);
    CHECK(std::abs(z.z[f](0, 0) - 1.0 / y) < 1e-12 * std::abs(1.0 / y));
  }
}

TEST_CASE("Schur reduction matches a dense nodal solve on a stacked board") {
  for (double via : {0.0, 5e-12}) {
    sim::PdnConfig cfg;
    cfg.stack.chip = {4, 4, sim::UnitCellParams::chip_default()};
    cfg.stack.package = sim::GridSpec{6, 6, sim::UnitCellParams::package_default()};
    cfg.stack.via_inductance_henry = via;
    cfg.freq_points = 21;
    const sim::Simulator simr(cfg);
    const std::vector<int> decaps{0, 5, 15};
    const auto fast = simr.final_profile(4, 4, 10, decaps);
    const auto ref = testing::dense_probe_profile(cfg.stack, 10, decaps, cfg.decap, cfg.grid());
    CHECK(max_rel(fast, ref) < 1e-8);
  }
}

TEST_CASE("objective is the weighted impedance reduction") {
  const sim::Simulator simr(sim::PdnConfig::chip_only(3, 3));
  const std::vector<int> decaps{1, 2};
  const auto zi = simr.initial_profile(3, 3, 4);
  const auto zf = simr.final_profile(3, 3, 4, decaps);
  const auto grid = simr.config().grid();
  CHECK(sim::objective(zi, zf, grid) == Catch::Approx(testing::objective_oracle(zi, zf, grid)).epsilon(1e-14));
  CHECK(simr.score(3, 3, 4, decaps) > 0);
  CHECK(sim::objective(zi, zi, grid) == 0.0);
}

TEST_CASE("adding a decap never raises the score on the toy board") {
  const sim::Simulator simr(sim::PdnConfig::chip_only(3, 3));
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> pool{0, 1, 2, 3, 5, 6, 7, 8};
    rng.shuffle(pool);
    const std::vector<int> one{pool[0]}, two{pool[0], pool[1]};
    CHECK(simr.score(3, 3, 4, two) >= simr.score(3, 3, 4, one) - 1e-9);
  }
}

TEST_CASE("simulator counts evaluations and caches the bare sweep") {
  const sim::Simulator simr(sim::PdnConfig::chip_only(3, 3));
  const auto& a = simr.bare_sweep(3, 3);
  const auto& b = simr.bare_sweep(3, 3);
  CHECK(&a == &b);
  const std::vector<int> d{0};
  simr.score(3, 3, 4, d);
  simr.score(3, 3, 4, d);
  CHECK(simr.evaluations() == 2);
}

TEST_CASE("PDN config round-trips through JSON with a stable hash") {
  const auto c = sim::PdnConfig::reference();
  const auto back = sim::PdnConfig::from_json(c.to_json());
  CHECK(back.hash() == c.hash());
  CHECK(sim::PdnConfig::chip_only(5, 5).hash() != c.hash());
  auto bad = c.to_json();
  bad["decap"]["c"] = -1.0;
  CHECK_THROWS_AS(sim::PdnConfig::from_json(bad), ContractViolation);
}

TEST_CASE("invalid ports are rejected") {
  const sim::Simulator simr(sim::PdnConfig::chip_only(3, 3));
  const std::vector<int> out_of_range{9};
  CHECK_THROWS_AS(simr.score(3, 3, 4, out_of_range), ContractViolation);
}
