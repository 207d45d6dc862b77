// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "dpp/sim/network.hpp"

namespace dpp::sim {

/// |Z| at the probe after terminating `decap_ports` with decaps:
///   Z' = Z_pp - Z_pc (Z_cc + diag(z_d))^-1 Z_cp
/// per frequency. Decap ports are sorted before use, so the result is
/// bit-identical under any reordering of the input list.
std::vector<double> attach_decaps(const FrequencySweepZ& z_bare, int probe, std::span<const int> decap_ports,
                                  const DecapModel& decap);

/// |Z_probe,probe| of the bare network.
std::vector<double> probe_profile(const FrequencySweepZ& z_bare, int probe);

/// sum_f (z_init(f) - z_final(f)) * (1 GHz / f), summed in grid order.
double objective(std::span<const double> z_init, std::span<const double> z_final, const FreqGrid& grid);

}  // namespace dpp::sim
