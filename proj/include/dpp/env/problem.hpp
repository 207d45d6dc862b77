// SPDX-License-Identifier: Apache-2.0
//
// Decap placement problems: task condition, action feasibility, episode
// state and the per-port input features.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dpp/common/rng.hpp"

namespace dpp::env {

/// Port condition codes. Numeric values are part of the data format:
/// 0 allowed, 1 keep-out, 2 probe.
enum class PortCondition : std::uint8_t { Allowed = 0, KeepOut = 1, Probe = 2 };

static_assert(static_cast<int>(PortCondition::Allowed) == 0 && static_cast<int>(PortCondition::KeepOut) == 1 &&
                  static_cast<int>(PortCondition::Probe) == 2,
              "condition codes are fixed by the data format");

struct Problem {
  int n_rows = 0;
  int n_cols = 0;
  int probe = 0;
  std::vector<int> keepout;  // sorted ascending, no duplicates

  int n_ports() const { return n_rows * n_cols; }
  int row_of(int port) const { return port / n_cols; }
  int col_of(int port) const { return port % n_cols; }
  PortCondition condition(int port) const;
  bool is_keepout(int port) const;

  /// Throws ContractViolation if indices are out of range, keep-out
  /// overlaps the probe, or keep-out is unsorted/duplicated.
  void validate() const;

  /// Hash of the canonical form; used to keep problem sets disjoint.
  std::uint64_t canonical_hash() const;

  friend bool operator==(const Problem&, const Problem&) = default;
};

/// Ordered list of decap ports (the action trajectory).
struct Placement {
  std::vector<int> actions;

  int size() const { return static_cast<int>(actions.size()); }
  friend bool operator==(const Placement&, const Placement&) = default;
};

/// Rejects duplicates and ports that are probe, keep-out or out of range.
void validate_placement(const Problem& problem, const Placement& placement);

struct State {
  Problem problem;
  std::vector<int> chosen;
};

/// All ports except the probe, keep-out and already chosen ones, ascending.
/// An empty result means the board is exhausted.
std::vector<int> feasible_actions(const State& state);

/// Per-port feasibility flags (1 = selectable).
std::vector<std::uint8_t> feasibility_mask(const Problem& problem, std::span<const int> chosen);

/// Appends `action`. Infeasible actions are rejected, never repaired.
State step(State state, int action);

/// Number of ports available before any decap is placed.
int free_port_count(const Problem& problem);

/// Row per port: x = col/(n_cols-1), y = row/(n_rows-1) (0 for a single
/// column/row), then the one-hot condition (allowed, keep-out, probe).
using NodeFeatures = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
constexpr int kNodeFeatureDim = 5;
NodeFeatures encode_features(const Problem& problem);

/// Normalised (x, y) of a port, as used by encode_features.
std::pair<double, double> normalized_position(const Problem& problem, int port);

/// Probe uniform over all ports; |keep-out| uniform over {0..keepout_max};
/// keep-out drawn without replacement from the non-probe ports.
Problem gen_problem(Rng& rng, int n_rows, int n_cols, int keepout_max);
Problem gen_problem(std::uint64_t seed, int n_rows, int n_cols, int keepout_max);

struct ProblemSetSpec {
  int n_rows = 10;
  int n_cols = 10;
  int keepout_max = 15;
};

/// Draws `counts[i]` problems for each requested split from one seeded
/// stream, rejecting any problem whose canonical hash was already used in
/// any split (or appears in `exclude`).
std::vector<std::vector<Problem>> generate_disjoint_sets(std::uint64_t seed, const ProblemSetSpec& spec,
                                                         std::span<const int> counts,
                                                         std::span<const std::uint64_t> exclude = {});

}  // namespace dpp::env
