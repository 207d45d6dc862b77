// SPDX-License-Identifier: Apache-2.0
//
// Benchmark results. Every row is an aggregate of entries, and every entry
// stores its problem and placement so the score can be re-simulated.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dpp/env/problem.hpp"

namespace dpp::bench {

constexpr int kReportSchemaVersion = 1;

struct BenchEntry {
  std::string method;
  int budget = 1;
  int k = 0;
  std::uint64_t seed = 0;
  int problem_index = 0;
  env::Problem problem;
  env::Placement placement;
  double score = 0.0;
};

struct BenchRow {
  std::string method;
  int budget = 1;
  int k = 0;
  double mean = 0.0;
  /// Std of per-seed means when several seeds contributed, otherwise the
  /// std over problems; `std_over` says which.
  double std = 0.0;
  std::string std_over;
  int n = 0;
};

struct BenchReport {
  nlohmann::json metadata = nlohmann::json::object();
  std::vector<BenchRow> rows;
  std::vector<BenchEntry> entries;
};

/// Groups entries by (method, budget, K) in first-appearance order.
std::vector<BenchRow> summarize(const std::vector<BenchEntry>& entries);

nlohmann::json report_to_json(const BenchReport& report);
BenchReport report_from_json(const nlohmann::json& j);

void write_report(const std::filesystem::path& path, const BenchReport& report);
BenchReport read_report(const std::filesystem::path& path);

/// method,budget,K,mean,std,std_over,n
std::string rows_csv(const std::vector<BenchRow>& rows);

}  // namespace dpp::bench
