// SPDX-License-Identifier: Apache-2.0

#include "dpp/bench/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>

#include "dpp/bench/min_k.hpp"
#include "dpp/bench/report.hpp"
#include "dpp/bench/svg.hpp"
#include "dpp/common/errors.hpp"
#include "dpp/common/io.hpp"
#include "dpp/common/parallel.hpp"
#include "dpp/cse/trainer.hpp"
#include "dpp/env/evaluate.hpp"
#include "dpp/env/problem_io.hpp"
#include "dpp/search/expert_dataset.hpp"

namespace dpp::bench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct PdnOptions {
  std::string file;
  std::string preset = "reference";

  void add(CLI::App* app) {
    app->add_option("--pdn", file, "PDN config JSON (overrides --pdn-preset)");
    app->add_option("--pdn-preset", preset, "reference | chip-only")->check(CLI::IsMember({"reference", "chip-only"}));
  }
  bool given() const { return !file.empty(); }
  sim::PdnConfig load() const {
    if (!file.empty()) return sim::PdnConfig::load(file);
    return preset == "chip-only" ? sim::PdnConfig::chip_only(10, 10) : sim::PdnConfig::reference();
  }
};

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t parse_hex64(const std::string& s) {
  require(!s.empty() && s.size() <= 16 && s.find_first_not_of("0123456789abcdefABCDEF") == std::string::npos,
          "expected a hexadecimal hash, got '" + s + "'");
  return std::stoull(s, nullptr, 16);
}

// ---------------------------------------------------------------- gen

struct GenOptions {
  int rows = 10, cols = 10;
  int train = 0, val = 100, test = 100;
  int keepout_max = -1;
  std::uint64_t seed = 0;
  std::string out;
  bool label = false;
  int k = 20;
  int ga_budget = 100;
  int threads = 1;
  PdnOptions pdn;
};

int cmd_gen(const GenOptions& o, std::ostream& out) {
  require(o.rows >= 1 && o.cols >= 1, "gen: board dimensions must be positive");
  const int ports = o.rows * o.cols;
  const int keepout_max = o.keepout_max >= 0 ? o.keepout_max : std::max(0, std::min(15, ports - 2));
  const env::ProblemSetSpec spec{o.rows, o.cols, keepout_max};
  require(!o.label || o.train > 0, "gen: --label needs --train > 0");
  const std::vector<int> counts{o.train, o.val, o.test};
  const auto sets = env::generate_disjoint_sets(o.seed, spec, counts);
  std::optional<search::ExpertDataset> ds;
  if (o.label) {
    const sim::Simulator simulator(o.pdn.load());
    ds = search::label_problems(sets[0], o.k, search::GaConfig::for_budget(o.ga_budget), derive_seed(o.seed, 0x1ABE1),
                                simulator, o.threads);
  }
  const fs::path dir(o.out);
  const char* names[] = {"train.json", "val.json", "test.json"};
  for (std::size_t i = 0; i < sets.size(); ++i)
    if (counts[i] > 0) env::write_problem_set(dir / names[i], sets[i]);
  if (ds) search::write_dataset(dir / "dataset.jsonl", *ds);
  out << "wrote " << o.train << " train / " << o.val << " val / " << o.test << " test problems to " << dir.string()
      << (ds ? " with GA labels" : "") << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- train

struct TrainOptions {
  std::string dataset, val, out, log;
  std::string preset = "full";
  std::string config_file;
  std::optional<double> lr, lambda;
  std::optional<int> batch, perms, max_epochs, patience, val_every, n_train, self_batch, order_bias_samples;
  std::optional<long> max_steps;
  std::optional<int> layers, dim, ff, heads;
  std::string ppe_mode;
  bool no_ppe = false, no_pcn = false, no_rcn = false, ablate = false, no_residual = false;
  std::uint64_t seed = 1;
  std::uint64_t init_seed = 0;
  int threads = 1;
  PdnOptions pdn;
};

int cmd_train(const TrainOptions& o, std::ostream& out, std::ostream& err) {
  const auto t0 = Clock::now();
  cse::TrainConfig cfg = o.preset == "toy" ? cse::TrainConfig::toy() : cse::TrainConfig::full();
  model::ModelConfig mc = o.preset == "toy" ? model::ModelConfig::toy() : model::ModelConfig{};
  if (!o.config_file.empty()) {
    json j;
    try {
      j = json::parse(read_text_file(o.config_file));
    } catch (const json::exception& e) {
      throw IoError("malformed train config " + o.config_file + ": " + e.what());
    }
    if (j.contains("train")) {
      json merged = cfg.to_json();
      merged.update(j.at("train"));
      cfg = cse::TrainConfig::from_json(merged);
    }
    if (j.contains("model")) {
      json merged = mc.to_json();
      merged.update(j.at("model"));
      mc = model::ModelConfig::from_json(merged);
    }
  }
  if (o.lr) cfg.lr = *o.lr;
  if (o.lambda) cfg.lambda_eff = *o.lambda;
  if (o.batch) cfg.batch = *o.batch;
  if (o.perms) cfg.perms = *o.perms;
  if (o.max_epochs) cfg.max_epochs = *o.max_epochs;
  if (o.max_steps) cfg.max_steps = *o.max_steps;
  if (o.patience) cfg.patience = *o.patience;
  if (o.val_every) cfg.val_every = *o.val_every;
  if (o.self_batch) cfg.self_batch = *o.self_batch;
  if (o.order_bias_samples) cfg.order_bias_samples = *o.order_bias_samples;
  if (o.layers) mc.n_layers = *o.layers;
  if (o.dim) mc.d = *o.dim;
  if (o.ff) mc.ff = *o.ff;
  if (o.heads) mc.n_heads = *o.heads;
  if (!o.ppe_mode.empty()) mc.ppe_mode = o.ppe_mode == "norm" ? model::PpeMode::Norm : model::PpeMode::DeltaAndNorm;
  if (o.ablate) mc = mc.ablated();
  if (o.no_ppe) mc.use_ppe = false;
  if (o.no_pcn) mc.use_pcn = false;
  if (o.no_rcn) mc.use_rcn = false;
  if (o.no_residual) mc.residual = false;
  cfg.seed = o.seed;
  cfg.threads = o.threads;
  mc.validate();

  const search::ExpertDataset ds = search::read_dataset(o.dataset);
  require(!ds.records.empty(), "train: dataset is empty");
  std::vector<search::ExpertRecord> records = ds.records;
  if (o.n_train) {
    require(*o.n_train >= 1 && *o.n_train <= static_cast<int>(records.size()),
            "train: --n-train exceeds the dataset size");
    records.resize(static_cast<std::size_t>(*o.n_train));
  }
  cfg.k = ds.k;
  cfg.n_train = static_cast<int>(records.size());
  const auto val = env::read_problem_set(o.val);
  cfg.n_val = static_cast<int>(val.size());
  cfg.keepout_max = std::min(cfg.keepout_max, std::max(0, records[0].problem.n_ports() - 2));
  cfg.validate();

  const sim::PdnConfig pdn = o.pdn.load();
  require(pdn.hash() == ds.pdn_hash, "train: dataset was labelled with a different PDN config");
  const sim::Simulator simulator(pdn);
  model::DevFormer init(mc, o.init_seed);
  const std::string diag = o.out + ".diagnostic.json";
  const cse::TrainResult res = cse::train(std::move(init), records, val, cfg, simulator, diag);

  const json extra{{"train", cfg.to_json()},
                   {"pdn", pdn.to_json()},
                   {"best_val_J", res.best_val_j},
                   {"best_step", res.best_step},
                   {"steps", res.steps}};
  res.best.save(o.out, extra);
  const std::string log_path = o.log.empty() ? o.out + ".log.csv" : o.log;
  write_text_file(log_path, cse::train_log_csv(res.log));
  out << "steps " << res.steps << ", best validation J " << fmt("%.6f", res.best_val_j) << " at step "
      << res.best_step << (res.early_stopped ? " (early stop)" : "") << "\n";
  out << "checkpoint " << o.out << " config hash " << hex64(res.best.config_hash(extra)) << "\n";
  err << "wall time " << fmt("%.2f", seconds_since(t0)) << " s\n";
  return kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalOptions {
  std::string checkpoint, problems, dataset, out, expect_hash;
  std::vector<int> ks;
  int threads = 1;
  PdnOptions pdn;
};

sim::PdnConfig pdn_for_checkpoint(const PdnOptions& o, const json& extra) {
  if (o.given() || !extra.contains("pdn")) return o.load();
  return sim::PdnConfig::from_json(extra.at("pdn"));
}

int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream& err) {
  const auto t0 = Clock::now();
  BenchReport report;
  std::optional<sim::Simulator> simulator;
  if (!o.dataset.empty()) {
    require(o.checkpoint.empty(), "eval: give either --checkpoint or --dataset");
    const search::ExpertDataset ds = search::read_dataset(o.dataset);
    const sim::PdnConfig pdn = o.pdn.load();
    require(pdn.hash() == ds.pdn_hash, "eval: dataset was labelled with a different PDN config");
    simulator.emplace(pdn);
    std::vector<double> scores(ds.records.size());
    parallel_for(ds.records.size(), o.threads, [&](std::size_t i) {
      scores[i] = env::evaluate(ds.records[i].problem, ds.records[i].placement, *simulator);
    });
    double stored = 0.0;
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
      const auto& r = ds.records[i];
      report.entries.push_back(BenchEntry{"dataset", ds.budget, ds.k, r.seed, static_cast<int>(i), r.problem,
                                          r.placement, scores[i]});
      stored += r.score;
      if (scores[i] != r.score)
        throw NumericError("eval: record " + std::to_string(i) + " re-simulates to " + fmt("%.17g", scores[i]) +
                           " but stores " + fmt("%.17g", r.score));
    }
    report.metadata["source"] = "dataset";
    report.metadata["stored_mean"] = stored / static_cast<double>(ds.records.size());
    report.metadata["pdn"] = pdn.to_json();
  } else {
    require(!o.checkpoint.empty() && !o.problems.empty(), "eval: --checkpoint and --problems are required");
    std::optional<std::uint64_t> expect;
    if (!o.expect_hash.empty()) expect = parse_hex64(o.expect_hash);
    const auto loaded = model::DevFormer::load(o.checkpoint, expect);
    const sim::PdnConfig pdn = pdn_for_checkpoint(o.pdn, loaded.extra);
    simulator.emplace(pdn);
    const auto problems = env::read_problem_set(o.problems);
    require(!problems.empty(), "eval: no problems");
    const std::vector<int> ks = o.ks.empty() ? std::vector<int>{20} : o.ks;
    for (int k : ks) {
      std::vector<BenchEntry> slot(problems.size());
      parallel_for(problems.size(), o.threads, [&](std::size_t i) {
        const env::Episode ep = loaded.model.rollout(problems[i], k, env::DecodeMode::Greedy, 0);
        slot[i] = BenchEntry{"devformer", 1, k, 0, static_cast<int>(i), problems[i], ep.placement,
                             env::evaluate(problems[i], ep.placement, *simulator)};
      });
      report.entries.insert(report.entries.end(), slot.begin(), slot.end());
    }
    report.metadata["source"] = "checkpoint";
    report.metadata["config_hashes"] = json{{"checkpoint", hex64(loaded.config_hash)}, {"pdn", hex64(pdn.hash())}};
    report.metadata["pdn"] = pdn.to_json();
    report.metadata["model"] = loaded.model.config().to_json();
  }
  report.metadata["seeds"] = json::array({0});
  report.rows = summarize(report.entries);
  write_report(o.out, report);
  for (const auto& r : report.rows)
    out << r.method << " K=" << r.k << " mean " << fmt("%.6f", r.mean) << " std " << fmt("%.6f", r.std) << " n "
        << r.n << "\n";
  err << "wall time " << fmt("%.2f", seconds_since(t0)) << " s\n";
  return kExitOk;
}

// ---------------------------------------------------------------- min-k

struct MinKOptions {
  std::string problems, checkpoint, method, out;
  double target = 0.0;
  int k_max = 20;
  int budget = 100;
  std::uint64_t seed = 0;
  int threads = 1;
  PdnOptions pdn;
};

int cmd_min_k(const MinKOptions& o, std::ostream& out, std::ostream& err) {
  const auto t0 = Clock::now();
  require(o.checkpoint.empty() != o.method.empty(), "min-k: give exactly one of --checkpoint or --method");
  require(o.k_max >= 1, "min-k: --k-max must be >= 1");
  const auto problems = env::read_problem_set(o.problems);
  std::optional<model::DevFormer::Loaded> loaded;
  sim::PdnConfig pdn = o.pdn.load();
  if (!o.checkpoint.empty()) {
    loaded.emplace(model::DevFormer::load(o.checkpoint));
    pdn = pdn_for_checkpoint(o.pdn, loaded->extra);
  }
  const sim::Simulator simulator(pdn);
  std::vector<MinKResult> results(problems.size());
  parallel_for(problems.size(), o.threads, [&](std::size_t i) {
    results[i] = loaded ? min_k_policy(loaded->model, problems[i], o.target, o.k_max, simulator)
                        : min_k_search(o.method, problems[i], o.target, o.k_max, o.budget,
                                       derive_seed(o.seed, i), simulator);
  });
  json j;
  j["schema_version"] = 1;
  j["kind"] = "min_k_report";
  j["method"] = loaded ? "devformer" : o.method;
  j["target"] = o.target;
  j["k_max"] = o.k_max;
  j["budget"] = loaded ? 1 : o.budget;
  j["seed"] = o.seed;
  j["pdn"] = pdn.to_json();
  j["results"] = json::array();
  int reached = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    json rec{{"problem_index", i},
             {"problem", env::problem_to_json(problems[i])},
             {"reached", r.min_k.has_value()},
             {"min_k", r.min_k ? json(*r.min_k) : json(nullptr)},
             {"placement", r.placement.actions},
             {"score", r.score},
             {"evaluations", r.evaluations}};
    if (!r.min_k) rec["failed_at_k_max"] = o.k_max;
    reached += r.min_k ? 1 : 0;
    j["results"].push_back(std::move(rec));
  }
  write_text_file(o.out, j.dump(1) + "\n");
  out << reached << " of " << results.size() << " problems reached J* = " << fmt("%.6g", o.target)
      << " within K_max = " << o.k_max << "\n";
  err << "wall time " << fmt("%.2f", seconds_since(t0)) << " s\n";
  return kExitOk;
}

// ---------------------------------------------------------------- baselines

struct BaselineOptions {
  std::string problems, out;
  int k = 20;
  std::vector<std::string> methods{"ga", "rs"};
  std::vector<int> budgets{100, 500};
  int seeds = 1;
  std::uint64_t seed = 0;
  int threads = 1;
  PdnOptions pdn;
};

int cmd_baselines(const BaselineOptions& o, std::ostream& out, std::ostream& err) {
  const auto t0 = Clock::now();
  require(o.seeds >= 1, "baselines: --seeds must be >= 1");
  for (const auto& m : o.methods) require(m == "ga" || m == "rs", "baselines: unknown method " + m);
  for (int b : o.budgets) require(b >= 1, "baselines: budgets must be positive");
  const auto problems = env::read_problem_set(o.problems);
  require(!problems.empty(), "baselines: no problems");
  const sim::PdnConfig pdn = o.pdn.load();
  const sim::Simulator simulator(pdn);

  BenchReport report;
  std::vector<std::uint64_t> seeds;
  for (int s = 0; s < o.seeds; ++s) seeds.push_back(derive_seed(o.seed, static_cast<std::uint64_t>(s)));
  for (const auto& method : o.methods) {
    for (int budget : o.budgets) {
      if (method == "ga") search::GaConfig::for_budget(budget).validate();
      for (std::uint64_t seed : seeds) {
        std::vector<BenchEntry> slot(problems.size());
        parallel_for(problems.size(), o.threads, [&](std::size_t i) {
          const auto scorer = search::make_scorer(problems[i], simulator);
          const std::uint64_t ps = derive_seed(seed, i);
          const search::ExpertRecord best =
              method == "ga" ? search::ga_solve(problems[i], o.k, search::GaConfig::for_budget(budget, ps), scorer)
                             : search::random_search(problems[i], o.k, budget, ps, scorer);
          slot[i] = BenchEntry{method, budget, o.k, seed, static_cast<int>(i), problems[i], best.placement, best.score};
        });
        report.entries.insert(report.entries.end(), slot.begin(), slot.end());
      }
    }
  }
  report.rows = summarize(report.entries);
  report.metadata["source"] = "baselines";
  report.metadata["seeds"] = seeds;
  report.metadata["pdn"] = pdn.to_json();
  report.metadata["config_hashes"] = json{{"pdn", hex64(pdn.hash())}};

  const fs::path dir(o.out);
  std::vector<Series> series;
  for (const auto& method : o.methods) {
    Series s{method, {}, {}};
    for (const auto& r : report.rows)
      if (r.method == method) {
        s.x.push_back(r.budget);
        s.y.push_back(r.mean);
      }
    series.push_back(std::move(s));
  }
  write_report(dir / "baselines.json", report);
  write_text_file(dir / "score_vs_budget.csv", rows_csv(report.rows));
  write_text_file(dir / "score_vs_budget.svg",
                  line_plot_svg(series, PlotSpec{"Score vs. simulation budget (K=" + std::to_string(o.k) + ")",
                                                 "budget M", "mean score", true, false, true}));
  for (const auto& r : report.rows)
    out << r.method << " M=" << r.budget << " mean " << fmt("%.6f", r.mean) << " std " << fmt("%.6f", r.std) << "\n";
  err << "wall time " << fmt("%.2f", seconds_since(t0)) << " s\n";
  return kExitOk;
}

// ---------------------------------------------------------------- report

struct ReportOptions {
  std::vector<std::string> runs;
  std::string out;
  bool verify = false;
  int cases = 3;
};

struct LoadedRun {
  std::string tag;
  BenchReport report;
};

struct LoadedLog {
  std::string tag;
  std::vector<std::vector<double>> rows;
};

std::vector<std::vector<double>> parse_log_csv(const std::string& text, const std::string& name) {
  std::vector<std::vector<double>> rows;
  std::size_t pos = text.find('\n');
  if (pos == std::string::npos || text.compare(0, 5, "step,") != 0) throw IoError("malformed training log " + name);
  while (++pos < text.size()) {
    const std::size_t end = text.find('\n', pos);
    const std::string line = text.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    std::vector<double> vals;
    std::size_t a = 0;
    while (a <= line.size()) {
      const std::size_t b = line.find(',', a);
      const std::string cell = line.substr(a, b == std::string::npos ? std::string::npos : b - a);
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError("malformed training log " + name);
      }
      if (b == std::string::npos) break;
      a = b + 1;
    }
    if (vals.size() != 5) throw IoError("malformed training log " + name);
    rows.push_back(std::move(vals));
    if (end == std::string::npos) break;
    pos = end;
  }
  return rows;
}

int cmd_report(const ReportOptions& o, std::ostream& out, std::ostream& err) {
  const auto t0 = Clock::now();
  require(!o.runs.empty(), "report: at least one --run directory is required");
  require(o.cases >= 0, "report: --cases must be >= 0");
  std::vector<LoadedRun> runs;
  std::vector<LoadedLog> logs;
  for (std::size_t ri = 0; ri < o.runs.size(); ++ri) {
    const fs::path dir(o.runs[ri]);
    if (!fs::is_directory(dir)) throw IoError("report: run directory " + dir.string() + " does not exist");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    const std::string prefix = o.runs.size() > 1 ? "r" + std::to_string(ri) + "_" : "";
    std::size_t found = 0;
    for (const auto& f : files) {
      const std::string name = f.filename().string();
      if (name.size() > 8 && name.compare(name.size() - 8, 8, ".log.csv") == 0) {
        logs.push_back({prefix + name.substr(0, name.size() - 8), parse_log_csv(read_text_file(f), f.string())});
        ++found;
      } else if (f.extension() == ".json") {
        json j;
        try {
          j = json::parse(read_text_file(f));
        } catch (const json::exception&) {
          continue;
        }
        if (!j.is_object() || j.value("kind", "") != "bench_report") continue;
        runs.push_back({prefix + f.stem().string(), report_from_json(j)});
        ++found;
      }
    }
    if (found == 0) throw IoError("report: run directory " + dir.string() + " holds no bench reports or training logs");
  }

  std::map<std::string, std::string> outputs;
  std::string summary = "report,method,budget,K,mean,std,std_over,n\n";
  std::size_t verified = 0;
  for (const auto& run : runs) {
    const auto& rep = run.report;
    for (const auto& line : [&] {
           std::vector<std::string> lines;
           std::string csv = rows_csv(rep.rows);
           std::size_t p = csv.find('\n') + 1;
           while (p < csv.size()) {
             const std::size_t e = csv.find('\n', p);
             lines.push_back(csv.substr(p, e - p));
             p = e + 1;
           }
           return lines;
         }())
      summary += run.tag + "," + line + "\n";

    std::optional<sim::Simulator> simulator;
    if (rep.metadata.contains("pdn")) simulator.emplace(sim::PdnConfig::from_json(rep.metadata.at("pdn")));

    if (o.verify) {
      if (!simulator) throw ContractViolation("report --verify: " + run.tag + " does not record its PDN config");
      std::size_t bad = 0;
      for (const auto& e : rep.entries)
        if (env::evaluate(e.problem, e.placement, *simulator) != e.score) ++bad;
      const auto rows = summarize(rep.entries);
      bool rows_ok = rows.size() == rep.rows.size();
      for (std::size_t i = 0; rows_ok && i < rows.size(); ++i)
        rows_ok = rows[i].method == rep.rows[i].method && rows[i].budget == rep.rows[i].budget &&
                  rows[i].k == rep.rows[i].k && rows[i].mean == rep.rows[i].mean && rows[i].std == rep.rows[i].std &&
                  rows[i].n == rep.rows[i].n;
      if (bad > 0 || !rows_ok)
        throw ContractViolation("report --verify: " + run.tag + ": " + std::to_string(bad) +
                                " entries do not re-simulate to their stored score" +
                                (rows_ok ? "" : "; aggregate rows do not match the entries"));
      verified += rep.entries.size();
    }

    // Score vs budget when a method was run at several budgets.
    std::map<std::string, Series> by_method;
    for (const auto& r : rep.rows) {
      const std::string label = r.method + " K=" + std::to_string(r.k);
      auto& s = by_method[label];
      s.label = label;
      s.x.push_back(r.budget);
      s.y.push_back(r.mean);
    }
    std::vector<Series> multi;
    for (auto& [m, s] : by_method)
      if (s.x.size() > 1) multi.push_back(s);
    if (!multi.empty()) {
      outputs[run.tag + "_score_vs_budget.svg"] =
          line_plot_svg(multi, PlotSpec{"Score vs. budget (" + run.tag + ")", "budget M", "mean score", true, false, true});
      outputs[run.tag + "_score_vs_budget.csv"] = rows_csv(rep.rows);
    }

    // Per-case impedance curves and placement maps for the first entries of
    // each (method, budget, K) group.
    std::map<std::string, int> shown;
    for (const auto& e : rep.entries) {
      const std::string group = e.method + "_M" + std::to_string(e.budget) + "_K" + std::to_string(e.k);
      int& n = shown[group];
      if (n >= o.cases) continue;
      const std::string stem = run.tag + "_" + group + "_case" + std::to_string(n);
      ++n;
      outputs[stem + "_placement.svg"] = placement_heatmap_svg(
          e.problem, e.placement, group + " problem " + std::to_string(e.problem_index) + " J=" + fmt("%.4f", e.score));
      if (!simulator) continue;
      const auto init = simulator->initial_profile(e.problem.n_rows, e.problem.n_cols, e.problem.probe);
      const auto fin = simulator->final_profile(e.problem.n_rows, e.problem.n_cols, e.problem.probe,
                                                e.placement.actions);
      const auto& grid = simulator->bare_sweep(e.problem.n_rows, e.problem.n_cols).grid.points_hz;
      std::string csv = "frequency_hz,z_initial_ohm,z_final_ohm\n";
      char buf[96];
      for (std::size_t f = 0; f < grid.size(); ++f) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", grid[f], init[f], fin[f]);
        csv += buf;
      }
      outputs[stem + "_impedance.csv"] = csv;
      outputs[stem + "_impedance.svg"] = line_plot_svg(
          {Series{"initial", grid, init}, Series{"final", grid, fin}},
          PlotSpec{"Probe impedance, " + group + " problem " + std::to_string(e.problem_index), "frequency (Hz)",
                   "|Z| (ohm)", true, true, false});
    }
  }
  for (const auto& log : logs) {
    Series vj{"validation J", {}, {}};
    for (const auto& r : log.rows) {
      vj.x.push_back(r[0]);
      vj.y.push_back(r[3]);
    }
    outputs[log.tag + "_training.svg"] =
        line_plot_svg({vj}, PlotSpec{"Validation score (" + log.tag + ")", "step", "mean J", false, false, true});
  }
  outputs["summary.csv"] = summary;

  // Everything is rendered before the first write.
  for (const auto& [name, text] : outputs) write_text_file(fs::path(o.out) / name, text);
  out << "wrote " << outputs.size() << " files to " << o.out;
  if (o.verify) out << "; verified " << verified << " entries by re-simulation";
  out << "\n";
  err << "wall time " << fmt("%.2f", seconds_since(t0)) << " s\n";
  return kExitOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
  int rows = 10, cols = 10, probe = 0;
  std::vector<int> decaps;
  std::vector<int> keepout;
  std::string out, initial_out;
  PdnOptions pdn;
};

int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
  env::Problem p{o.rows, o.cols, o.probe, o.keepout};
  std::sort(p.keepout.begin(), p.keepout.end());
  p.validate();
  const env::Placement placement{o.decaps};
  env::validate_placement(p, placement);
  const sim::Simulator simulator(o.pdn.load());
  const auto& grid = simulator.bare_sweep(p.n_rows, p.n_cols).grid;
  const auto fin = simulator.final_profile(p.n_rows, p.n_cols, p.probe, placement.actions);
  sim::write_profile_csv(o.out, grid, fin);
  if (!o.initial_out.empty())
    sim::write_profile_csv(o.initial_out, grid, simulator.initial_profile(p.n_rows, p.n_cols, p.probe));
  out << "J " << fmt("%.17g", env::evaluate(p, placement, simulator)) << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Decap placement benchmark", "dppbench"};
  app.require_subcommand(1);
  const int hw = default_thread_count();

  GenOptions gen;
  auto* g = app.add_subcommand("gen", "generate disjoint problem sets and optional GA labels");
  g->add_option("--rows", gen.rows);
  g->add_option("--cols", gen.cols);
  g->add_option("--train", gen.train, "training problems (labelled with --label)");
  g->add_option("--val", gen.val);
  g->add_option("--test", gen.test);
  g->add_option("--keepout-max", gen.keepout_max, "largest keep-out set (default min(15, ports-2))");
  g->add_option("--seed", gen.seed);
  g->add_option("--out", gen.out, "output directory")->required();
  g->add_flag("--label", gen.label, "label the training problems with GA");
  g->add_option("--k", gen.k);
  g->add_option("--ga-budget", gen.ga_budget);
  g->add_option("--threads", gen.threads)->default_val(hw);
  gen.pdn.add(g);

  TrainOptions tr;
  auto* t = app.add_subcommand("train", "train a policy on an expert dataset");
  t->add_option("--dataset", tr.dataset)->required();
  t->add_option("--val", tr.val, "validation problem set")->required();
  t->add_option("--out", tr.out, "checkpoint path")->required();
  t->add_option("--log", tr.log, "training log CSV (default <out>.log.csv)");
  t->add_option("--preset", tr.preset)->check(CLI::IsMember({"full", "toy"}));
  t->add_option("--config", tr.config_file, "JSON with optional \"train\" and \"model\" sections");
  t->add_option("--lr", tr.lr);
  t->add_option("--lambda", tr.lambda, "self-loss weight, scale included (full preset 5e32)");
  t->add_option("--batch", tr.batch);
  t->add_option("--perms", tr.perms, "permuted copies per label (P)");
  t->add_option("--max-epochs", tr.max_epochs);
  t->add_option("--max-steps", tr.max_steps);
  t->add_option("--patience", tr.patience);
  t->add_option("--val-every", tr.val_every);
  t->add_option("--n-train", tr.n_train, "use the first N records");
  t->add_option("--self-batch", tr.self_batch);
  t->add_option("--order-bias-samples", tr.order_bias_samples);
  t->add_option("--layers", tr.layers);
  t->add_option("--dim", tr.dim);
  t->add_option("--ff", tr.ff);
  t->add_option("--heads", tr.heads);
  t->add_option("--ppe-mode", tr.ppe_mode)->check(CLI::IsMember({"norm", "delta_and_norm"}));
  t->add_flag("--no-ppe", tr.no_ppe);
  t->add_flag("--no-pcn", tr.no_pcn);
  t->add_flag("--no-rcn", tr.no_rcn);
  t->add_flag("--no-residual", tr.no_residual);
  t->add_flag("--ablate", tr.ablate, "disable PPE, PCN and RCN together");
  t->add_option("--seed", tr.seed);
  t->add_option("--init-seed", tr.init_seed);
  t->add_option("--threads", tr.threads)->default_val(hw);
  tr.pdn.add(t);

  EvalOptions ev;
  auto* e = app.add_subcommand("eval", "greedy single-shot evaluation, or re-simulation of a dataset");
  e->add_option("--checkpoint", ev.checkpoint);
  e->add_option("--problems", ev.problems);
  e->add_option("--dataset", ev.dataset);
  e->add_option("--k", ev.ks, "one or more K values")->delimiter(',');
  e->add_option("--expect-hash", ev.expect_hash, "refuse checkpoints with another config hash");
  e->add_option("--out", ev.out)->required();
  e->add_option("--threads", ev.threads)->default_val(hw);
  ev.pdn.add(e);

  MinKOptions mk;
  auto* m = app.add_subcommand("min-k", "smallest K reaching a target score");
  m->add_option("--problems", mk.problems)->required();
  m->add_option("--target", mk.target)->required();
  m->add_option("--k-max", mk.k_max);
  m->add_option("--checkpoint", mk.checkpoint);
  m->add_option("--method", mk.method)->check(CLI::IsMember({"ga", "rs", "exhaustive"}));
  m->add_option("--budget", mk.budget);
  m->add_option("--seed", mk.seed);
  m->add_option("--out", mk.out)->required();
  m->add_option("--threads", mk.threads)->default_val(hw);
  mk.pdn.add(m);

  BaselineOptions bl;
  auto* b = app.add_subcommand("baselines", "GA and random search over simulation budgets");
  b->add_option("--problems", bl.problems)->required();
  b->add_option("--k", bl.k);
  b->add_option("--methods", bl.methods)->delimiter(',');
  b->add_option("--budgets", bl.budgets)->delimiter(',');
  b->add_option("--seeds", bl.seeds, "independent seeds per budget");
  b->add_option("--seed", bl.seed);
  b->add_option("--out", bl.out, "output directory")->required();
  b->add_option("--threads", bl.threads)->default_val(hw);
  bl.pdn.add(b);

  ReportOptions rp;
  auto* r = app.add_subcommand("report", "CSV tables and SVG plots from stored results");
  r->add_option("--run", rp.runs, "run directory (repeatable)")->required();
  r->add_option("--out", rp.out)->required();
  r->add_flag("--verify", rp.verify, "re-simulate every stored placement");
  r->add_option("--cases", rp.cases, "cases plotted per method");

  SimulateOptions sm;
  auto* s = app.add_subcommand("simulate", "probe impedance profile of one placement");
  s->add_option("--rows", sm.rows);
  s->add_option("--cols", sm.cols);
  s->add_option("--probe", sm.probe)->required();
  s->add_option("--keepout", sm.keepout)->delimiter(',');
  s->add_option("--decaps", sm.decaps)->delimiter(',');
  s->add_option("--out", sm.out)->required();
  s->add_option("--initial-out", sm.initial_out);
  sm.pdn.add(s);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& pe) {
    if (pe.get_exit_code() == 0) {
      out << app.help();
      if (!app.get_subcommands().empty()) out << app.get_subcommands()[0]->help();
      return kExitOk;
    }
    err << "error: " << pe.what() << "\n";
    return kExitContract;
  }

  try {
    if (g->parsed()) return cmd_gen(gen, out);
    if (t->parsed()) return cmd_train(tr, out, err);
    if (e->parsed()) return cmd_eval(ev, out, err);
    if (m->parsed()) return cmd_min_k(mk, out, err);
    if (b->parsed()) return cmd_baselines(bl, out, err);
    if (r->parsed()) return cmd_report(rp, out, err);
    if (s->parsed()) return cmd_simulate(sm, out);
  } catch (const ContractViolation& ex) {
    err << "contract violation: " << ex.what() << "\n";
    return kExitContract;
  } catch (const NumericError& ex) {
    err << "numeric failure: " << ex.what() << "\n";
    return kExitNumeric;
  } catch (const IoError& ex) {
    err << "io error: " << ex.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& ex) {
    err << "io error: " << ex.what() << "\n";
    return kExitIo;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitFailure;
  }
  return kExitContract;
}

}  // namespace dpp::bench
