// SPDX-License-Identifier: Apache-2.0
//
// Offline expert dataset: one GA-labelled record per problem, stored as
// JSON lines (a header line, then one record per line).

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dpp/env/problem.hpp"
#include "dpp/search/search.hpp"
#include "dpp/sim/simulator.hpp"

namespace dpp::search {

constexpr int kDatasetSchemaVersion = 1;

struct ExpertDataset {
  int k = 0;
  int budget = 0;
  std::uint64_t pdn_hash = 0;
  std::vector<ExpertRecord> records;

  std::int64_t total_simulations() const { return static_cast<std::int64_t>(budget) * static_cast<std::int64_t>(records.size()); }
};

/// Labels each problem with ga_solve. Record i uses seed derive_seed(seed, i).
ExpertDataset label_problems(std::span<const env::Problem> problems, int k, const GaConfig& ga, std::uint64_t seed,
                             const sim::Simulator& simulator, int threads = 1);

/// Generates N problems disjoint from `exclude` and labels them.
ExpertDataset build_expert_dataset(int n_problems, const env::ProblemSetSpec& spec, int k, const GaConfig& ga,
                                   std::uint64_t seed, const sim::Simulator& simulator, int threads = 1,
                                   std::span<const std::uint64_t> exclude = {});

std::string dataset_to_jsonl(const ExpertDataset& dataset);
ExpertDataset dataset_from_jsonl(const std::string& text);

void write_dataset(const std::filesystem::path& path, const ExpertDataset& dataset);
ExpertDataset read_dataset(const std::filesystem::path& path);

}  // namespace dpp::search
