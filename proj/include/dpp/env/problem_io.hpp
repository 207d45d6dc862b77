// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "dpp/env/problem.hpp"

namespace dpp::env {

constexpr int kProblemSchemaVersion = 1;

nlohmann::json problem_to_json(const Problem& p);
Problem problem_from_json(const nlohmann::json& j);

/// {"schema_version": 1, "kind": "problem_set", "problems": [...]}
void write_problem_set(const std::filesystem::path& path, const std::vector<Problem>& problems);
std::vector<Problem> read_problem_set(const std::filesystem::path& path);

}  // namespace dpp::env
