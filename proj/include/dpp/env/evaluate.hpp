// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dpp/env/problem.hpp"
#include "dpp/sim/simulator.hpp"

namespace dpp::env {

/// Objective of a placement. The placement is validated first; the bare
/// PDN sweep is cached inside the simulator.
double evaluate(const Problem& problem, const Placement& placement, const sim::Simulator& simulator);

}  // namespace dpp::env
