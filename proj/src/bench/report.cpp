// SPDX-License-Identifier: Apache-2.0

#include "dpp/bench/report.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <tuple>

#include "dpp/common/errors.hpp"
#include "dpp/common/io.hpp"
#include "dpp/env/problem_io.hpp"

namespace dpp::bench {

using nlohmann::json;

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

std::vector<BenchRow> summarize(const std::vector<BenchEntry>& entries) {
  using Key = std::tuple<std::string, int, int>;
  std::vector<Key> order;
  std::map<Key, std::map<std::uint64_t, std::vector<double>>> groups;
  for (const auto& e : entries) {
    Key key{e.method, e.budget, e.k};
    if (!groups.count(key)) order.push_back(key);
    groups[key][e.seed].push_back(e.score);
  }
  std::vector<BenchRow> rows;
  for (const auto& key : order) {
    const auto& by_seed = groups.at(key);
    BenchRow r;
    std::tie(r.method, r.budget, r.k) = key;
    std::vector<double> all, seed_means;
    for (const auto& [seed, scores] : by_seed) {
      all.insert(all.end(), scores.begin(), scores.end());
      seed_means.push_back(mean_of(scores));
    }
    r.mean = mean_of(all);
    r.n = static_cast<int>(all.size());
    if (by_seed.size() > 1) {
      r.std = std_of(seed_means);
      r.std_over = "seeds";
    } else {
      r.std = std_of(all);
      r.std_over = "problems";
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

json report_to_json(const BenchReport& report) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "bench_report";
  j["metadata"] = report.metadata;
  j["rows"] = json::array();
  for (const auto& r : report.rows)
    j["rows"].push_back(json{{"method", r.method}, {"budget", r.budget}, {"K", r.k}, {"mean", r.mean},
                             {"std", r.std}, {"std_over", r.std_over}, {"n", r.n}});
  j["entries"] = json::array();
  for (const auto& e : report.entries)
    j["entries"].push_back(json{{"method", e.method},
                                {"budget", e.budget},
                                {"K", e.k},
                                {"seed", e.seed},
                                {"problem_index", e.problem_index},
                                {"problem", env::problem_to_json(e.problem)},
                                {"placement", e.placement.actions},
                                {"score", e.score}});
  return j;
}

BenchReport report_from_json(const json& j) {
  try {
    if (j.value("kind", "") != "bench_report" || j.value("schema_version", -1) != kReportSchemaVersion)
      throw IoError("not a version-1 bench report");
    BenchReport r;
    r.metadata = j.at("metadata");
    for (const auto& row : j.at("rows"))
      r.rows.push_back(BenchRow{row.at("method").get<std::string>(), row.at("budget").get<int>(),
                                row.at("K").get<int>(), row.at("mean").get<double>(), row.at("std").get<double>(),
                                row.at("std_over").get<std::string>(), row.at("n").get<int>()});
    for (const auto& e : j.at("entries")) {
      BenchEntry b;
      b.method = e.at("method").get<std::string>();
      b.budget = e.at("budget").get<int>();
      b.k = e.at("K").get<int>();
      b.seed = e.at("seed").get<std::uint64_t>();
      b.problem_index = e.at("problem_index").get<int>();
      b.problem = env::problem_from_json(e.at("problem"));
      b.placement.actions = e.at("placement").get<std::vector<int>>();
      b.score = e.at("score").get<double>();
      r.entries.push_back(std::move(b));
    }
    return r;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed bench report: ") + e.what());
  }
}

void write_report(const std::filesystem::path& path, const BenchReport& report) {
  write_text_file(path, report_to_json(report).dump(1) + "\n");
}

BenchReport read_report(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw IoError("malformed bench report " + path.string() + ": " + e.what());
  }
  return report_from_json(j);
}

std::string rows_csv(const std::vector<BenchRow>& rows) {
  std::string out = "method,budget,K,mean,std,std_over,n\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%d,%d,%.17g,%.17g,%s,%d\n", r.method.c_str(), r.budget, r.k, r.mean, r.std,
                  r.std_over.c_str(), r.n);
    out += buf;
  }
  return out;
}

}  // namespace dpp::bench
