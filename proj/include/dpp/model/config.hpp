// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include <nlohmann/json.hpp>

namespace dpp::model {

/// Probe-relative position feature: scalar distance, or (dx, dy, distance).
enum class PpeMode { Norm, DeltaAndNorm };

/// Embedding used as the "previous action" before the first step.
enum class StartToken { Learned, Zero };

struct ModelConfig {
  int n_layers = 3;
  int d = 128;
  int ff = 512;
  int n_heads = 8;
  PpeMode ppe_mode = PpeMode::Norm;
  StartToken start_token = StartToken::Learned;
  bool use_ppe = true;
  bool use_pcn = true;
  bool use_rcn = true;
  bool residual = true;
  double tanh_clip = 10.0;
  double bn_eps = 1e-5;
  double bn_momentum = 0.1;

  int ppe_dim() const { return ppe_mode == PpeMode::Norm ? 1 : 3; }

  /// Throws ContractViolation (e.g. n_heads not dividing d).
  void validate() const;

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);

  /// Same model without PPE, PCN and RCN: the decoder context falls back
  /// to the mean port embedding.
  ModelConfig ablated() const;

  static ModelConfig toy();
  static ModelConfig gradcheck_toy();
};

}  // namespace dpp::model
