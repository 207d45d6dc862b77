// SPDX-License-Identifier: Apache-2.0

#include "dpp/env/evaluate.hpp"

namespace dpp::env {

double evaluate(const Problem& problem, const Placement& placement, const sim::Simulator& simulator) {
  problem.validate();
  validate_placement(problem, placement);
  return simulator.score(problem.n_rows, problem.n_cols, problem.probe, placement.actions);
}

}  // namespace dpp::env
