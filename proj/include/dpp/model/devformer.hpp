// SPDX-License-Identifier: Apache-2.0
//
// Encoder: h0 = node_linear(features) + ppe_linear(ppe), then per layer
//   h = BN(h + MHA(h)); h = BN(h + FF(h))      (residuals optional)
// Decoder step t with previous action a_{t-1} (start token at t = 0):
//   q = query_linear(PCN(h_probe) + RCN(h_prev))
//   g = out_proj(MHA-attention(q, glimpse_k(h), glimpse_v(h), mask))
//   logit_i = C tanh(g . logit_k(h_i) / sqrt(d)), masked log-softmax.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "dpp/env/policy.hpp"
#include "dpp/env/problem.hpp"
#include "dpp/model/config.hpp"
#include "dpp/nn/layers.hpp"

namespace dpp::model {

using nn::Matrix;

/// Probe-relative features, one row per port: (dist) or (dx, dy, dist) in
/// normalised coordinates.
Matrix ppe_features(const env::Problem& problem, PpeMode mode);

/// Inference-time encoding of one problem with the projections the decoder
/// reuses at every step.
struct Encoding {
  Matrix h;          // N x d
  Matrix h_probe;    // 1 x d
  Matrix glimpse_k;  // N x d
  Matrix glimpse_v;  // N x d
  Matrix logit_k;    // N x d
  Matrix h_mean;     // 1 x d
};

class DevFormer {
 public:
  DevFormer(ModelConfig cfg, std::uint64_t init_seed);
  /// Adopts existing parameters; names and shapes must match cfg.
  DevFormer(ModelConfig cfg, nn::ParamStore params);

  const ModelConfig& config() const { return cfg_; }
  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }

  /// Stacked encodings (B*N) x d for problems of identical dimensions.
  nn::Var encode_batch(nn::Binder& p, const std::vector<const env::Problem*>& problems, nn::BnMode mode) const;

  /// Teacher-forced log pi(a|x) per problem, B x 1. All placements must
  /// have the same length. An infeasible label is a ContractViolation.
  nn::Var sequence_log_probs(nn::Binder& p, const std::vector<const env::Problem*>& problems,
                             const std::vector<const env::Placement*>& placements, nn::BnMode mode) const;

  /// Eval-mode encoding (running statistics), no gradient tape.
  Encoding encode(const env::Problem& problem) const;
  /// 1 x d decoder query for the step following `prev` (nullopt at t = 0).
  Matrix context_query(const Encoding& enc, std::optional<int> prev) const;
  /// Log-probabilities over all ports, -inf where mask is 0.
  std::vector<double> decode_step(const Encoding& enc, const Matrix& query,
                                  const std::vector<std::uint8_t>& mask) const;

  env::Episode rollout(const env::Problem& problem, int k, env::DecodeMode mode, std::uint64_t seed) const;
  double log_prob(const env::Problem& problem, const env::Placement& placement) const;

  /// Checkpoint: nn container whose config text is
  /// {"model": <ModelConfig>, "extra": <extra>} dumped with sorted keys.
  void save(const std::filesystem::path& path, const nlohmann::json& extra = nlohmann::json::object()) const;
  struct Loaded;
  /// Throws IoError if the stored config hash is inconsistent and
  /// ContractViolation if `expected_hash` is given and differs.
  static Loaded load(const std::filesystem::path& path, std::optional<std::uint64_t> expected_hash = std::nullopt);

  /// Hash of the stored config text for this model with `extra`.
  std::uint64_t config_hash(const nlohmann::json& extra = nlohmann::json::object()) const;
  std::string config_text(const nlohmann::json& extra) const;

 private:
  void init_params(std::uint64_t seed);
  /// Builds the decoder context rows from gathered probe/previous rows.
  nn::Var query_from(nn::Binder& p, nn::Var h_probe_rows, nn::Var h_prev_rows, nn::Var h_mean_rows) const;
  nn::Var decoder_logits(nn::Binder& p, nn::Var query, nn::Var gk, nn::Var gv, nn::Var lk, nn::Index q_group,
                         nn::Index n_ports, const nn::Mask& mask) const;

  ModelConfig cfg_;
  nn::ParamStore params_;
};

struct DevFormer::Loaded {
  DevFormer model;
  nlohmann::json extra;
  std::uint64_t config_hash;
};

/// SequencePolicy view of a model with the encoding cached per problem.
class DevFormerPolicy final : public env::SequencePolicy {
 public:
  explicit DevFormerPolicy(const DevFormer& model) : model_(model) {}
  std::vector<double> next_log_probs(const env::State& state) override;

 private:
  const DevFormer& model_;
  std::optional<env::Problem> cached_for_;
  Encoding enc_;
};

}  // namespace dpp::model
