// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dpp/sim/network.hpp"

namespace dpp::sim {

/// Everything needed to score a placement. Serialised as the PDN config
/// file (see docs/pdn_config.schema.json).
struct PdnConfig {
  StackSpec stack;
  DecapModel decap;
  int freq_points = 201;
  double f_min_hz = 2.0e8;
  double f_max_hz = 2.0e10;

  FreqGrid grid() const { return make_freq_grid(freq_points, f_min_hz, f_max_hz); }
  void validate() const;

  /// Same stack with the chip layer resized; the package is kept.
  PdnConfig with_chip_dims(int rows, int cols) const;

  /// 10x10 chip on a 40x40 package, default decap and grid.
  static PdnConfig reference();
  /// Chip layer only, no package.
  static PdnConfig chip_only(int rows, int cols);

  nlohmann::json to_json() const;
  static PdnConfig from_json(const nlohmann::json& j);
  static PdnConfig load(const std::filesystem::path& path);

  /// FNV-1a of the canonical JSON dump.
  std::uint64_t hash() const;
};

/// Scores placements against a PDN. The bare port sweep of each board size
/// is computed once and cached; afterwards a placement costs one
/// (K x K) solve per frequency. Safe to share across threads.
class Simulator {
 public:
  explicit Simulator(PdnConfig base);

  const PdnConfig& config() const { return base_; }

  const FrequencySweepZ& bare_sweep(int rows, int cols) const;

  std::vector<double> initial_profile(int rows, int cols, int probe) const;
  std::vector<double> final_profile(int rows, int cols, int probe, std::span<const int> decaps) const;

  /// Objective of placing `decaps` for the given probe. Counts one evaluation.
  double score(int rows, int cols, int probe, std::span<const int> decaps) const;

  std::uint64_t evaluations() const { return evaluations_.load(); }

 private:
  struct Entry {
    std::once_flag once;
    FrequencySweepZ sweep;
  };

  Entry& entry(int rows, int cols) const;

  PdnConfig base_;
  mutable std::mutex mutex_;
  mutable std::map<std::pair<int, int>, std::unique_ptr<Entry>> cache_;
  mutable std::atomic<std::uint64_t> evaluations_{0};
};

/// frequency_hz,z_ohm
void write_profile_csv(const std::filesystem::path& path, const FreqGrid& grid, std::span<const double> z);

}  // namespace dpp::sim
