// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "dpp/nn/tensor.hpp"

namespace dpp::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction over the trainable tensors of one store.
/// Moment buffers are sized on the first step and tied to store order.
class Adam {
 public:
  explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

  void step(ParamStore& store);
  long steps() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  long t_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

}  // namespace dpp::nn
