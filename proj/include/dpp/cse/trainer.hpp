// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dpp/model/devformer.hpp"
#include "dpp/search/search.hpp"
#include "dpp/sim/simulator.hpp"

namespace dpp::cse {

struct TrainConfig {
  double lr = 1e-5;
  int batch = 100;
  int perms = 4;              // P
  double lambda_eff = 5e32;   // lambda already multiplied by its 1e32 scale
  int k = 20;
  int n_train = 2000;
  int n_val = 100;
  int max_epochs = 200;
  long max_steps = 0;         // 0: no step cap
  int patience = 20;          // validation rounds without improvement
  int val_every = 0;          // steps between validations; 0: once per epoch
  int refresh_every = 1;      // steps between frozen-copy refreshes
  int self_batch = 0;         // self-loss problems per step; 0: same as batch
  int transforms = 1;         // permutations per sampled trajectory
  int order_bias_samples = 100;
  int keepout_max = 15;       // for freshly generated self-loss problems
  std::uint64_t seed = 1;
  int threads = 1;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);

  static TrainConfig full();
  static TrainConfig toy();
};

struct TrainLogRow {
  long step = 0;
  double train_nll = 0.0;
  double self_loss = std::numeric_limits<double>::quiet_NaN();  // NaN when lambda_eff == 0
  double val_j = 0.0;
  double order_bias = std::numeric_limits<double>::quiet_NaN();
};

struct TrainResult {
  model::DevFormer best;
  model::DevFormer last;  // parameters after the final step
  std::vector<TrainLogRow> log;
  double best_val_j = 0.0;
  long best_step = 0;
  long steps = 0;
  int epochs = 0;
  bool early_stopped = false;
};

/// Mean greedy (single-shot) J over `problems`.
double greedy_mean_score(const model::DevFormer& model, const std::vector<env::Problem>& problems, int k,
                         const sim::Simulator& simulator, int threads = 1);

/// Trains `init` on the augmented labels. Validation problems must be
/// disjoint from the training problems. A non-finite loss throws
/// NumericError; when `diagnostic_path` is set a JSON state dump is written
/// there first.
TrainResult train(model::DevFormer init, const std::vector<search::ExpertRecord>& records,
                  const std::vector<env::Problem>& validation, const TrainConfig& cfg,
                  const sim::Simulator& simulator, const std::filesystem::path& diagnostic_path = {});

/// "step,train_nll,self_loss,val_J,order_bias" with %.17g values.
std::string train_log_csv(const std::vector<TrainLogRow>& log);

}  // namespace dpp::cse
