// SPDX-License-Identifier: Apache-2.0

#include "dpp/search/expert_dataset.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

#include "dpp/common/errors.hpp"
#include "dpp/common/io.hpp"
#include "dpp/common/parallel.hpp"
#include "dpp/env/problem_io.hpp"

namespace dpp::search {

using nlohmann::json;

ExpertDataset label_problems(std::span<const env::Problem> problems, int k, const GaConfig& ga, std::uint64_t seed,
                             const sim::Simulator& simulator, int threads) {
  ExpertDataset ds;
  ds.k = k;
  ds.budget = ga.budget();
  ds.pdn_hash = simulator.config().hash();
  ds.records.resize(problems.size());
  parallel_for(problems.size(), threads, [&](std::size_t i) {
    GaConfig cfg = ga;
    cfg.seed = derive_seed(seed, i);
    ds.records[i] = ga_solve(problems[i], k, cfg, make_scorer(problems[i], simulator));
  });
  return ds;
}

ExpertDataset build_expert_dataset(int n_problems, const env::ProblemSetSpec& spec, int k, const GaConfig& ga,
                                   std::uint64_t seed, const sim::Simulator& simulator, int threads,
                                   std::span<const std::uint64_t> exclude) {
  require(n_problems >= 1, "build_expert_dataset: N must be >= 1");
  const int counts[] = {n_problems};
  auto sets = env::generate_disjoint_sets(derive_seed(seed, 0xD47A), spec, counts, exclude);
  return label_problems(sets[0], k, ga, seed, simulator, threads);
}

std::string dataset_to_jsonl(const ExpertDataset& ds) {
  std::ostringstream out;
  json header = {{"schema_version", kDatasetSchemaVersion},
                 {"kind", "expert_dataset"},
                 {"k", ds.k},
                 {"budget", ds.budget},
                 {"n_records", ds.records.size()},
                 {"total_simulations", ds.total_simulations()},
                 {"pdn_hash", ds.pdn_hash}};
  out << header.dump() << '\n';
  for (const auto& r : ds.records) {
    json rec = {{"problem", env::problem_to_json(r.problem)},
                {"placement", r.placement.actions},
                {"score", r.score},
                {"budget", r.budget},
                {"seed", r.seed}};
    out << rec.dump() << '\n';
  }
  return out.str();
}

ExpertDataset dataset_from_jsonl(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  ExpertDataset ds;
  try {
    if (!std::getline(in, line)) throw IoError("empty dataset");
    const json header = json::parse(line);
    if (header.value("schema_version", -1) != kDatasetSchemaVersion || header.value("kind", "") != "expert_dataset")
      throw IoError("unsupported dataset header");
    ds.k = header.at("k").get<int>();
    ds.budget = header.at("budget").get<int>();
    ds.pdn_hash = header.at("pdn_hash").get<std::uint64_t>();
    const auto expected = header.at("n_records").get<std::size_t>();
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json rec = json::parse(line);
      ExpertRecord r;
      r.problem = env::problem_from_json(rec.at("problem"));
      r.placement.actions = rec.at("placement").get<std::vector<int>>();
      r.score = rec.at("score").get<double>();
      r.budget = rec.at("budget").get<int>();
      r.seed = rec.at("seed").get<std::uint64_t>();
      env::validate_placement(r.problem, r.placement);
      ds.records.push_back(std::move(r));
    }
    if (ds.records.size() != expected) throw IoError("dataset record count does not match its header");
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed dataset: ") + e.what());
  }
  return ds;
}

void write_dataset(const std::filesystem::path& path, const ExpertDataset& dataset) {
  write_text_file(path, dataset_to_jsonl(dataset));
}

ExpertDataset read_dataset(const std::filesystem::path& path) { return dataset_from_jsonl(read_text_file(path)); }

}  // namespace dpp::search
