// SPDX-License-Identifier: Apache-2.0

#include "dpp/sim/network.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include <Eigen/SparseLU>

#include "dpp/common/errors.hpp"

namespace dpp::sim {

namespace {

constexpr double kResidualTolerance = 1e-9;

double omega(double f_hz) { return 2.0 * std::numbers::pi * f_hz; }

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

// Union-find over nodes; used to merge chip nodes shorted to the package.
struct NodeMerge {
  std::vector<int> parent;

  explicit NodeMerge(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // Keep the larger index as root so package nodes represent their group.
    if (a > b) std::swap(a, b);
    parent[static_cast<std::size_t>(a)] = b;
  }
};

struct NodeLayout {
  int n_raw = 0;              // chip + package cells
  std::vector<int> row_of;    // raw node -> matrix row
  int n_rows = 0;
};

NodeLayout layout_nodes(const StackSpec& spec) {
  const int n_chip = spec.chip.size();
  const int n_pkg = spec.package ? spec.package->size() : 0;
  NodeLayout out;
  out.n_raw = n_chip + n_pkg;
  NodeMerge merge(out.n_raw);
  if (spec.package && spec.via_inductance_henry == 0.0) {
    const auto map = chip_to_package_map(spec);
    for (int i = 0; i < n_chip; ++i) merge.unite(i, n_chip + map[static_cast<std::size_t>(i)]);
  }
  out.row_of.assign(static_cast<std::size_t>(out.n_raw), -1);
  std::vector<int> root_row(static_cast<std::size_t>(out.n_raw), -1);
  for (int i = 0; i < out.n_raw; ++i) {
    int r = merge.find(i);
    if (root_row[static_cast<std::size_t>(r)] < 0) root_row[static_cast<std::size_t>(r)] = out.n_rows++;
    out.row_of[static_cast<std::size_t>(i)] = root_row[static_cast<std::size_t>(r)];
  }
  return out;
}

void stamp_series(std::vector<Eigen::Triplet<Complex>>& t, int a, int b, Complex y) {
  if (a == b) return;
  t.emplace_back(a, a, y);
  t.emplace_back(b, b, y);
  t.emplace_back(a, b, -y);
  t.emplace_back(b, a, -y);
}

void stamp_grid(std::vector<Eigen::Triplet<Complex>>& t, const GridSpec& grid, int offset,
                const std::vector<int>& row_of, double w) {
  const auto& c = grid.cell;
  const Complex y_series = 1.0 / Complex(c.resistance_ohm, w * c.inductance_henry);
  const Complex y_shunt(c.conductance_siemens, w * c.capacitance_farad);
  auto row = [&](int r, int col) { return row_of[static_cast<std::size_t>(offset + r * grid.n_cols + col)]; };
  for (int r = 0; r < grid.n_rows; ++r) {
    for (int col = 0; col < grid.n_cols; ++col) {
      const int here = row(r, col);
      t.emplace_back(here, here, y_shunt);
      if (col + 1 < grid.n_cols) stamp_series(t, here, row(r, col + 1), y_series);
      if (r + 1 < grid.n_rows) stamp_series(t, here, row(r + 1, col), y_series);
    }
  }
}

}  // namespace

void UnitCellParams::validate() const {
  require(finite_nonneg(resistance_ohm) && finite_nonneg(inductance_henry) &&
              finite_nonneg(conductance_siemens) && finite_nonneg(capacitance_farad) &&
              finite_nonneg(width_meter),
          "UnitCellParams: all fields must be finite and >= 0");
  require(resistance_ohm > 0.0 || inductance_henry > 0.0,
          "UnitCellParams: resistance and inductance cannot both be 0");
}

UnitCellParams UnitCellParams::chip_default() {
  return {.resistance_ohm = 0.26,
          .inductance_henry = 22e-12,
          .conductance_siemens = 1.2e-3,
          .capacitance_farad = 0.77e-12,
          .width_meter = 300e-6};
}

UnitCellParams UnitCellParams::package_default() {
  return {.resistance_ohm = 0.093,
          .inductance_henry = 0.25e-9,
          .conductance_siemens = 5.4e-6,
          .capacitance_farad = 0.045e-12,
          .width_meter = 0.5e-3};
}

void FreqGrid::validate() const {
  require(points_hz.size() >= 1, "FreqGrid: empty");
  for (std::size_t i = 0; i < points_hz.size(); ++i) {
    require(std::isfinite(points_hz[i]) && points_hz[i] > 0.0, "FreqGrid: frequencies must be > 0");
    if (i > 0) require(points_hz[i] > points_hz[i - 1], "FreqGrid: frequencies must be strictly increasing");
  }
}

FreqGrid make_freq_grid(int n, double f_min_hz, double f_max_hz) {
  require(n >= 2, "make_freq_grid: n must be >= 2");
  require(std::isfinite(f_min_hz) && std::isfinite(f_max_hz) && f_min_hz > 0.0 && f_min_hz < f_max_hz,
          "make_freq_grid: need 0 < f_min < f_max");
  FreqGrid g;
  g.points_hz.resize(static_cast<std::size_t>(n));
  const double step = (f_max_hz - f_min_hz) / (n - 1);
  for (int i = 0; i < n; ++i) g.points_hz[static_cast<std::size_t>(i)] = f_min_hz + step * i;
  g.points_hz.back() = f_max_hz;
  return g;
}

FreqGrid default_freq_grid() { return make_freq_grid(201, 2.0e8, 2.0e10); }

void GridSpec::validate() const {
  require(n_rows >= 1 && n_cols >= 1, "GridSpec: rows and cols must be positive");
  cell.validate();
}

void StackSpec::validate() const {
  chip.validate();
  require(std::isfinite(via_inductance_henry) && via_inductance_henry >= 0.0,
          "StackSpec: via inductance must be >= 0");
  if (package) {
    package->validate();
    require(package->extent_x() >= chip.extent_x() && package->extent_y() >= chip.extent_y(),
            "StackSpec: package extent must cover the chip");
  }
}

std::vector<int> chip_to_package_map(const StackSpec& spec) {
  require(spec.package.has_value(), "chip_to_package_map: no package layer");
  const GridSpec& chip = spec.chip;
  const GridSpec& pkg = *spec.package;
  auto nearest = [](double coord, double width, int count) {
    // Package cell centres sit at (k + 0.5) * width - extent/2.
    const double k = (coord + 0.5 * count * width) / width - 0.5;
    int lo = static_cast<int>(std::floor(k));
    int best = lo;
    // Tie -> lower index; floor already prefers it unless k is beyond .5.
    if (k - lo > 0.5) best = lo + 1;
    return std::clamp(best, 0, count - 1);
  };
  std::vector<int> out(static_cast<std::size_t>(chip.size()));
  const double w = chip.cell.width_meter;
  for (int r = 0; r < chip.n_rows; ++r) {
    for (int c = 0; c < chip.n_cols; ++c) {
      const double x = (c + 0.5) * w - 0.5 * chip.n_cols * w;
      const double y = (r + 0.5) * w - 0.5 * chip.n_rows * w;
      const int pc = nearest(x, pkg.cell.width_meter, pkg.n_cols);
      const int pr = nearest(y, pkg.cell.width_meter, pkg.n_rows);
      out[static_cast<std::size_t>(r * chip.n_cols + c)] = pr * pkg.n_cols + pc;
    }
  }
  return out;
}

void DecapModel::validate() const {
  require(finite_nonneg(r_ohm) && finite_nonneg(l_henry) && std::isfinite(c_farad) && c_farad > 0.0,
          "DecapModel: need r >= 0, l >= 0, c > 0");
}

Complex decap_impedance(const DecapModel& d, double f_hz) {
  require(f_hz > 0.0, "decap_impedance: frequency must be > 0");
  const double w = omega(f_hz);
  return Complex(d.r_ohm, w * d.l_henry - 1.0 / (w * d.c_farad));
}

int FrequencySweepZ::index_of(int port) const {
  auto it = std::find(ports.begin(), ports.end(), port);
  return it == ports.end() ? -1 : static_cast<int>(it - ports.begin());
}

std::vector<int> chip_node_rows(const StackSpec& spec) {
  const NodeLayout layout = layout_nodes(spec);
  return {layout.row_of.begin(), layout.row_of.begin() + spec.chip.size()};
}

SparseAdmittance assemble_admittance(const StackSpec& spec, double f_hz) {
  spec.validate();
  require(f_hz > 0.0, "assemble_admittance: frequency must be > 0");
  const NodeLayout layout = layout_nodes(spec);
  const double w = omega(f_hz);
  std::vector<Eigen::Triplet<Complex>> t;
  t.reserve(static_cast<std::size_t>(layout.n_raw) * 9);
  stamp_grid(t, spec.chip, 0, layout.row_of, w);
  if (spec.package) {
    stamp_grid(t, *spec.package, spec.chip.size(), layout.row_of, w);
    if (spec.via_inductance_henry > 0.0) {
      const Complex y_via = 1.0 / Complex(0.0, w * spec.via_inductance_henry);
      const auto map = chip_to_package_map(spec);
      for (int i = 0; i < spec.chip.size(); ++i) {
        stamp_series(t, layout.row_of[static_cast<std::size_t>(i)],
                     layout.row_of[static_cast<std::size_t>(spec.chip.size() + map[static_cast<std::size_t>(i)])],
                     y_via);
      }
    }
  }
  SparseAdmittance y(layout.n_rows, layout.n_rows);
  y.setFromTriplets(t.begin(), t.end());
  y.makeCompressed();
  return y;
}

FrequencySweepZ solve_z_ports(const StackSpec& spec, std::span<const int> ports, const FreqGrid& grid) {
  spec.validate();
  grid.validate();
  const int n_chip = spec.chip.size();
  std::set<int> seen;
  for (int p : ports) {
    require(p >= 0 && p < n_chip, "solve_z_ports: port outside the chip grid");
    require(seen.insert(p).second, "solve_z_ports: duplicate port");
  }
  const std::vector<int> rows = chip_node_rows(spec);
  FrequencySweepZ out;
  out.ports.assign(ports.begin(), ports.end());
  out.grid = grid;
  out.z.reserve(grid.size());

  const Eigen::Index n_ports = static_cast<Eigen::Index>(ports.size());
  Eigen::SparseLU<SparseAdmittance, Eigen::COLAMDOrdering<int>> lu;
  bool analysed = false;
  for (double f : grid.points_hz) {
    SparseAdmittance y = assemble_admittance(spec, f);
    if (!analysed) {
      lu.analyzePattern(y);
      analysed = true;
    }
    lu.factorize(y);
    auto fail = [&](const std::string& why) {
      std::ostringstream msg;
      msg << "solve_z_ports: " << why << " at f = " << f << " Hz";
      return NumericError(msg.str());
    };
    if (lu.info() != Eigen::Success) throw fail("singular admittance matrix");
    ComplexMatrix rhs = ComplexMatrix::Zero(y.rows(), n_ports);
    for (Eigen::Index j = 0; j < n_ports; ++j) rhs(rows[static_cast<std::size_t>(ports[static_cast<std::size_t>(j)])], j) = 1.0;
    ComplexMatrix v = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !v.allFinite()) throw fail("solve failed");
    for (Eigen::Index j = 0; j < n_ports; ++j) {
      const double residual = (y * v.col(j) - rhs.col(j)).norm();
      if (residual > kResidualTolerance) throw fail("residual above tolerance");
    }
    ComplexMatrix z(n_ports, n_ports);
    for (Eigen::Index i = 0; i < n_ports; ++i)
      for (Eigen::Index j = 0; j < n_ports; ++j) z(i, j) = v(rows[static_cast<std::size_t>(ports[static_cast<std::size_t>(i)])], j);
    out.z.push_back(std::move(z));
  }
  return out;
}

}  // namespace dpp::sim
