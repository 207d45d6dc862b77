// SPDX-License-Identifier: Apache-2.0

#include "dpp/sim/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/LU>

#include "dpp/common/errors.hpp"

namespace dpp::sim {

namespace {

constexpr double kReductionResidualTolerance = 1e-9;

int checked_index(const FrequencySweepZ& z, int port, const char* what) {
  const int idx = z.index_of(port);
  if (idx < 0) {
    std::ostringstream msg;
    msg << "attach_decaps: " << what << " port " << port << " not in the sweep";
    throw ContractViolation(msg.str());
  }
  return idx;
}

}  // namespace

std::vector<double> probe_profile(const FrequencySweepZ& z_bare, int probe) {
  const int p = checked_index(z_bare, probe, "probe");
  std::vector<double> out(z_bare.z.size());
  for (std::size_t f = 0; f < z_bare.z.size(); ++f) out[f] = std::abs(z_bare.z[f](p, p));
  return out;
}

std::vector<double> attach_decaps(const FrequencySweepZ& z_bare, int probe, std::span<const int> decap_ports,
                                  const DecapModel& decap) {
  decap.validate();
  std::vector<int> sorted(decap_ports.begin(), decap_ports.end());
  std::sort(sorted.begin(), sorted.end());
  require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(), "attach_decaps: duplicate decap port");
  require(!std::binary_search(sorted.begin(), sorted.end(), probe), "attach_decaps: decap placed on the probe");

  const int p = checked_index(z_bare, probe, "probe");
  if (sorted.empty()) return probe_profile(z_bare, probe);

  const Eigen::Index k = static_cast<Eigen::Index>(sorted.size());
  std::vector<int> idx(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) idx[i] = checked_index(z_bare, sorted[i], "decap");

  std::vector<double> out(z_bare.z.size());
  ComplexMatrix z_cc(k, k);
  Eigen::VectorXcd z_cp(k), z_pc(k);
  for (std::size_t f = 0; f < z_bare.z.size(); ++f) {
    const ComplexMatrix& z = z_bare.z[f];
    const Complex zd = decap_impedance(decap, z_bare.grid.points_hz[f]);
    for (Eigen::Index i = 0; i < k; ++i) {
      z_cp(i) = z(idx[static_cast<std::size_t>(i)], p);
      z_pc(i) = z(p, idx[static_cast<std::size_t>(i)]);
      for (Eigen::Index j = 0; j < k; ++j) z_cc(i, j) = z(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
      z_cc(i, i) += zd;
    }
    Eigen::PartialPivLU<ComplexMatrix> lu(z_cc);
    Eigen::VectorXcd x = lu.solve(z_cp);
    const double rel = (z_cc * x - z_cp).norm() / std::max(z_cp.norm(), 1e-300);
    if (!x.allFinite() || rel > kReductionResidualTolerance) {
      std::ostringstream msg;
      msg << "attach_decaps: ill-conditioned termination solve at frequency index " << f;
      throw NumericError(msg.str());
    }
    out[f] = std::abs(z(p, p) - (z_pc.transpose() * x)(0));
  }
  return out;
}

double objective(std::span<const double> z_init, std::span<const double> z_final, const FreqGrid& grid) {
  require(z_init.size() == grid.size() && z_final.size() == grid.size(),
          "objective: profile length does not match the frequency grid");
  double total = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    total += (z_init[i] - z_final[i]) * (1.0e9 / grid.points_hz[i]);
  return total;
}

}  // namespace dpp::sim
