// SPDX-License-Identifier: Apache-2.0

#include "toy.hpp"

namespace dpp::testing {

sim::PdnConfig toy_pdn() { return sim::PdnConfig::chip_only(5, 5); }

ToySetup make_toy_setup(int seed, const sim::Simulator& simulator, int n_train, int n_val) {
  const env::ProblemSetSpec spec{5, 5, 3};
  ToySetup out;
  out.dataset = search::build_expert_dataset(n_train, spec, 4, search::GaConfig::preset(100), 100 + seed, simulator);
  std::vector<std::uint64_t> used;
  for (const auto& r : out.dataset.records) used.push_back(r.problem.canonical_hash());
  const std::vector<int> counts{n_val};
  out.validation = env::generate_disjoint_sets(900 + seed, spec, counts, used)[0];
  return out;
}

}  // namespace dpp::testing
