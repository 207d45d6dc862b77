// SPDX-License-Identifier: Apache-2.0

#include "dpp/env/problem_io.hpp"


#include "dpp/common/errors.hpp"
#include "dpp/common/io.hpp"

namespace dpp::env {

using nlohmann::json;

json problem_to_json(const Problem& p) {
  return {{"rows", p.n_rows}, {"cols", p.n_cols}, {"probe", p.probe}, {"keepout", p.keepout}};
}

Problem problem_from_json(const json& j) {
  Problem p;
  try {
    p.n_rows = j.at("rows").get<int>();
    p.n_cols = j.at("cols").get<int>();
    p.probe = j.at("probe").get<int>();
    p.keepout = j.at("keepout").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw ContractViolation(std::string("problem record: ") + e.what());
  }
  p.validate();
  return p;
}

void write_problem_set(const std::filesystem::path& path, const std::vector<Problem>& problems) {
  json j;
  j["schema_version"] = kProblemSchemaVersion;
  j["kind"] = "problem_set";
  j["problems"] = json::array();
  for (const auto& p : problems) j["problems"].push_back(problem_to_json(p));
  write_text_file(path, j.dump(1) + "\n");
}

std::vector<Problem> read_problem_set(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw IoError("malformed problem set " + path.string() + ": " + e.what());
  }
  if (j.value("schema_version", -1) != kProblemSchemaVersion)
    throw IoError("unsupported problem set schema in " + path.string());
  std::vector<Problem> out;
  for (const auto& rec : j.at("problems")) out.push_back(problem_from_json(rec));
  return out;
}

}  // namespace dpp::env
