// SPDX-License-Identifier: Apache-2.0
//
// Lumped RLGC model of a chip (optionally stacked on a package) and the
// port impedance sweep computed from its nodal admittance matrix.

#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace dpp::sim {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using SparseAdmittance = Eigen::SparseMatrix<Complex, Eigen::ColMajor, int>;

/// Per-cell electrical parameters. The series branch (R + jwL) joins
/// orthogonal neighbours, the shunt (G + jwC) ties each cell to ground.
struct UnitCellParams {
  double resistance_ohm = 0.0;
  double inductance_henry = 0.0;
  double conductance_siemens = 0.0;
  double capacitance_farad = 0.0;
  double width_meter = 0.0;

  void validate() const;

  static UnitCellParams chip_default();
  static UnitCellParams package_default();
};

struct FreqGrid {
  std::vector<double> points_hz;

  std::size_t size() const { return points_hz.size(); }
  void validate() const;
};

/// n equally spaced points from f_min_hz to f_max_hz, both included.
FreqGrid make_freq_grid(int n, double f_min_hz, double f_max_hz);

/// 201 points from 200 MHz to 20 GHz.
FreqGrid default_freq_grid();

struct GridSpec {
  int n_rows = 0;
  int n_cols = 0;
  UnitCellParams cell;

  int size() const { return n_rows * n_cols; }
  double extent_x() const { return n_cols * cell.width_meter; }
  double extent_y() const { return n_rows * cell.width_meter; }
  void validate() const;
};

struct StackSpec {
  GridSpec chip;
  std::optional<GridSpec> package;
  /// 0 shorts each chip node onto its package node.
  double via_inductance_henry = 0.0;

  void validate() const;
};

/// For every chip cell, the package cell whose centre is nearest when the
/// two layers share a centre point. Ties go to the lower package index.
std::vector<int> chip_to_package_map(const StackSpec& spec);

struct DecapModel {
  double r_ohm = 0.01;
  double l_henry = 1e-12;
  double c_farad = 1e-9;

  void validate() const;
};

/// r + jwl + 1/(jwc)
Complex decap_impedance(const DecapModel& d, double f_hz);

/// Open-circuit impedance matrices at a set of chip ports, one per frequency.
struct FrequencySweepZ {
  std::vector<int> ports;
  FreqGrid grid;
  std::vector<ComplexMatrix> z;

  /// Position of `port` in `ports`, or -1.
  int index_of(int port) const;
};

/// Nodal admittance of the stack at one frequency. Node i < chip.size() is
/// chip cell i (row-major); package cells follow. Chip nodes that are
/// shorted to the package share the package node's row.
SparseAdmittance assemble_admittance(const StackSpec& spec, double f_hz);

/// Row/column of the admittance matrix that carries each chip cell.
std::vector<int> chip_node_rows(const StackSpec& spec);

/// Z[i][j] = voltage at ports[i] for a unit current injected at ports[j].
/// Throws NumericError naming the frequency if a factorisation fails or the
/// relative residual exceeds 1e-9.
FrequencySweepZ solve_z_ports(const StackSpec& spec, std::span<const int> ports, const FreqGrid& grid);

}  // namespace dpp::sim
