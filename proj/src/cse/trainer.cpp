// SPDX-License-Identifier: Apache-2.0

#include "dpp/cse/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <unordered_set>

#include "dpp/common/errors.hpp"
#include "dpp/common/io.hpp"
#include "dpp/common/parallel.hpp"
#include "dpp/cse/losses.hpp"
#include "dpp/cse/symmetry.hpp"
#include "dpp/env/evaluate.hpp"
#include "dpp/nn/adam.hpp"

namespace dpp::cse {

using nlohmann::json;

void TrainConfig::validate() const {
  require(lr > 0.0 && std::isfinite(lr), "TrainConfig: lr must be positive");
  require(batch >= 2, "TrainConfig: batch must be >= 2 (batch-norm statistics)");
  require(perms >= 0, "TrainConfig: P must be >= 0");
  require(lambda_eff >= 0.0 && std::isfinite(lambda_eff), "TrainConfig: lambda_eff must be finite and >= 0");
  require(k >= 1, "TrainConfig: K must be >= 1");
  require(n_train >= 1 && n_val >= 1, "TrainConfig: dataset sizes must be positive");
  require(max_epochs >= 1 && max_steps >= 0 && patience >= 1 && val_every >= 0 && refresh_every >= 1,
          "TrainConfig: bad schedule");
  require(self_batch >= 0 && transforms >= 1 && order_bias_samples >= 0 && keepout_max >= 0,
          "TrainConfig: bad self-exploitation settings");
  require(threads >= 1, "TrainConfig: threads must be >= 1");
}

json TrainConfig::to_json() const {
  return json{{"lr", lr},
              {"batch", batch},
              {"perms", perms},
              {"lambda_eff", lambda_eff},
              {"k", k},
              {"n_train", n_train},
              {"n_val", n_val},
              {"max_epochs", max_epochs},
              {"max_steps", max_steps},
              {"patience", patience},
              {"val_every", val_every},
              {"refresh_every", refresh_every},
              {"self_batch", self_batch},
              {"transforms", transforms},
              {"order_bias_samples", order_bias_samples},
              {"keepout_max", keepout_max},
              {"seed", seed}};
}

TrainConfig TrainConfig::from_json(const json& j) {
  TrainConfig c;
  try {
    c.lr = j.value("lr", c.lr);
    c.batch = j.value("batch", c.batch);
    c.perms = j.value("perms", c.perms);
    c.lambda_eff = j.value("lambda_eff", c.lambda_eff);
    c.k = j.value("k", c.k);
    c.n_train = j.value("n_train", c.n_train);
    c.n_val = j.value("n_val", c.n_val);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.max_steps = j.value("max_steps", c.max_steps);
    c.patience = j.value("patience", c.patience);
    c.val_every = j.value("val_every", c.val_every);
    c.refresh_every = j.value("refresh_every", c.refresh_every);
    c.self_batch = j.value("self_batch", c.self_batch);
    c.transforms = j.value("transforms", c.transforms);
    c.order_bias_samples = j.value("order_bias_samples", c.order_bias_samples);
    c.keepout_max = j.value("keepout_max", c.keepout_max);
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception& e) {
    throw ContractViolation(std::string("TrainConfig: ") + e.what());
  }
  c.validate();
  return c;
}

TrainConfig TrainConfig::full() { return TrainConfig{}; }

TrainConfig TrainConfig::toy() {
  TrainConfig c;
  c.lr = 1e-3;
  c.batch = 25;
  c.perms = 4;
  c.lambda_eff = 10.0;
  c.k = 4;
  c.n_train = 50;
  c.n_val = 50;
  c.max_epochs = 30;
  c.patience = 20;
  c.self_batch = 25;
  c.order_bias_samples = 100;
  c.keepout_max = 3;
  return c;
}

double greedy_mean_score(const model::DevFormer& model, const std::vector<env::Problem>& problems, int k,
                         const sim::Simulator& simulator, int threads) {
  require(!problems.empty(), "greedy_mean_score: no problems");
  std::vector<double> scores(problems.size());
  parallel_for(problems.size(), threads, [&](std::size_t i) {
    const env::Episode ep = model.rollout(problems[i], k, env::DecodeMode::Greedy, 0);
    scores[i] = env::evaluate(problems[i], ep.placement, simulator);
  });
  double sum = 0.0;
  for (double s : scores) sum += s;
  return sum / static_cast<double>(scores.size());
}

namespace {

std::vector<env::Problem> fresh_problems(int count, int rows, int cols, int keepout_max, std::uint64_t seed,
                                         const std::unordered_set<std::uint64_t>& exclude) {
  Rng rng(seed);
  const int cap = std::min(keepout_max, rows * cols - 2);
  std::vector<env::Problem> out;
  while (static_cast<int>(out.size()) < count) {
    env::Problem p = env::gen_problem(rng, rows, cols, std::max(cap, 0));
    if (!exclude.count(p.canonical_hash())) out.push_back(std::move(p));
  }
  return out;
}

void dump_state(const std::filesystem::path& path, long step, int epoch, double expert, double self,
                const nn::ParamStore& params) {
  if (path.empty()) return;
  json j;
  j["step"] = step;
  j["epoch"] = epoch;
  j["expert_loss"] = std::isfinite(expert) ? json(expert) : json(std::to_string(expert));
  j["self_loss"] = std::isfinite(self) ? json(self) : json(std::to_string(self));
  json norms = json::object();
  json bad = json::array();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const nn::Tensor& t = params.tensor(i);
    const double n = t.value.norm();
    norms[params.name(i)] = std::isfinite(n) ? json(n) : json(std::to_string(n));
    if (!t.value.allFinite()) bad.push_back(params.name(i));
  }
  j["param_norms"] = norms;
  j["non_finite_params"] = bad;
  write_text_file(path, j.dump(1) + "\n");
}

}  // namespace

TrainResult train(model::DevFormer init, const std::vector<search::ExpertRecord>& records,
                  const std::vector<env::Problem>& validation, const TrainConfig& cfg,
                  const sim::Simulator& simulator, const std::filesystem::path& diagnostic_path) {
  cfg.validate();
  require(!records.empty(), "train: empty dataset");
  require(!validation.empty(), "train: empty validation set");
  const int rows = records[0].problem.n_rows;
  const int cols = records[0].problem.n_cols;
  std::unordered_set<std::uint64_t> val_hashes;
  for (const auto& v : validation) val_hashes.insert(v.canonical_hash());
  for (const auto& r : records) {
    require(r.problem.n_rows == rows && r.problem.n_cols == cols, "train: records must share board dimensions");
    require(r.placement.size() == cfg.k, "train: record K differs from the configured K");
    require(!val_hashes.count(r.problem.canonical_hash()), "train: a training problem appears in the validation set");
  }

  const std::vector<search::ExpertRecord> aug = augment(records, cfg.perms, derive_seed(cfg.seed, 1));
  const int self_batch = cfg.self_batch > 0 ? cfg.self_batch : cfg.batch;
  const bool use_self = cfg.lambda_eff > 0.0;

  model::DevFormer model = std::move(init);
  std::optional<model::DevFormer> frozen;
  nn::Adam adam(nn::AdamConfig{cfg.lr});
  Rng order_rng(derive_seed(cfg.seed, 2));

  TrainResult res{model, model, {}, -std::numeric_limits<double>::infinity(), 0, 0, 0, false};
  int rounds_without_gain = 0;
  double nll_acc = 0.0, self_acc = 0.0;
  long acc_steps = 0;
  long step = 0;
  bool stop = false;

  std::vector<env::Problem> ob_problems = validation;

  auto validate_now = [&] {
    TrainLogRow row;
    row.step = step;
    row.train_nll = acc_steps ? nll_acc / static_cast<double>(acc_steps) : std::numeric_limits<double>::quiet_NaN();
    if (use_self && acc_steps) row.self_loss = self_acc / static_cast<double>(acc_steps);
    row.val_j = greedy_mean_score(model, validation, cfg.k, simulator, cfg.threads);
    if (cfg.order_bias_samples > 0) {
      const model::DevFormer& m = model;
      row.order_bias = order_bias_estimate([&m] { return std::make_unique<model::DevFormerPolicy>(m); },
                                           ob_problems, cfg.k, cfg.order_bias_samples, derive_seed(cfg.seed, 3),
                                           cfg.threads)
                           .value;
    }
    res.log.push_back(row);
    nll_acc = self_acc = 0.0;
    acc_steps = 0;
    if (row.val_j > res.best_val_j) {
      res.best_val_j = row.val_j;
      res.best_step = step;
      res.best = model;
      rounds_without_gain = 0;
    } else if (++rounds_without_gain >= cfg.patience) {
      res.early_stopped = true;
      stop = true;
    }
  };

  const std::size_t steps_per_epoch = (aug.size() + static_cast<std::size_t>(cfg.batch) - 1) / cfg.batch;
  const long val_every = cfg.val_every > 0 ? cfg.val_every : static_cast<long>(steps_per_epoch);

  for (int epoch = 0; epoch < cfg.max_epochs && !stop; ++epoch) {
    res.epochs = epoch + 1;
    std::vector<std::size_t> order(aug.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    order_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size() && !stop; start += static_cast<std::size_t>(cfg.batch)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
      if (end - start < 2) continue;
      std::vector<const env::Problem*> probs;
      std::vector<const env::Placement*> labels;
      for (std::size_t i = start; i < end; ++i) {
        probs.push_back(&aug[order[i]].problem);
        labels.push_back(&aug[order[i]].placement);
      }

      if (!frozen || step % cfg.refresh_every == 0) frozen = model;
      nn::Graph g;
      nn::Binder p(g, model.params(), true, true);
      std::optional<nn::Var> self;
      nn::Var expert, total;
      try {
        if (use_self) {
          const auto xs = fresh_problems(self_batch, rows, cols, cfg.keepout_max,
                                         derive_seed(cfg.seed, 0x5E1F0000ULL + static_cast<std::uint64_t>(step)),
                                         val_hashes);
          const auto samples = sample_self_batch(*frozen, xs, cfg.k, derive_seed(cfg.seed, 0xA5A50000ULL + step),
                                                 cfg.transforms, cfg.threads);
          self = self_loss(model, p, *frozen, samples);
        }
        expert = expert_loss(model, p, probs, labels);
        total = self ? total_loss(g, expert, *self, cfg.lambda_eff) : expert;
      } catch (const NumericError& e) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        dump_state(diagnostic_path, step, epoch, nan, nan, model.params());
        throw NumericError(std::string(e.what()) + " at step " + std::to_string(step));
      }
      const double e_val = g.scalar(expert);
      const double s_val = self ? g.scalar(*self) : 0.0;
      if (!std::isfinite(g.scalar(total))) {
        dump_state(diagnostic_path, step, epoch, e_val, s_val, model.params());
        char msg[160];
        std::snprintf(msg, sizeof msg, "non-finite training loss at step %ld (expert %g, self %g)", step, e_val,
                      s_val);
        throw NumericError(msg);
      }
      model.params().zero_grad();
      g.backward(total);
      adam.step(model.params());
      ++step;
      nll_acc += e_val;
      self_acc += s_val;
      ++acc_steps;
      for (std::size_t i = 0; i < model.params().size(); ++i) {
        if (!model.params().tensor(i).value.allFinite()) {
          dump_state(diagnostic_path, step, epoch, e_val, s_val, model.params());
          throw NumericError("non-finite parameter " + model.params().name(i) + " after step " +
                             std::to_string(step));
        }
      }
      if (step % val_every == 0) validate_now();
      if (cfg.max_steps > 0 && step >= cfg.max_steps) stop = true;
    }
  }
  if (acc_steps > 0 || res.log.empty()) validate_now();
  res.steps = step;
  res.last = model;
  return res;
}

std::string train_log_csv(const std::vector<TrainLogRow>& log) {
  std::string out = "step,train_nll,self_loss,val_J,order_bias\n";
  char buf[160];
  for (const auto& r : log) {
    std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g,%.17g,%.17g\n", r.step, r.train_nll, r.self_loss, r.val_j,
                  r.order_bias);
    out += buf;
  }
  return out;
}

}  // namespace dpp::cse
