// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <unordered_map>

#include "dpp/common/rng.hpp"
#include "dpp/nn/ops.hpp"

namespace dpp::nn {

enum class BnMode { Train, Eval };

struct BnSettings {
  double eps = 1e-5;
  double momentum = 0.1;
};

/// Binds ParamStore tensors into one graph. With track = false every
/// tensor enters as a constant, which is how gradient-stopped copies are
/// evaluated. Running statistics are only written when update_running is set.
class Binder {
 public:
  Binder(Graph& g, ParamStore& store, bool track, bool update_running = false)
      : g_(g), store_(store), track_(track), update_running_(update_running) {}

  /// Read-only binding: constants only, running statistics untouched.
  static Binder frozen(Graph& g, const ParamStore& store) {
    return Binder(g, const_cast<ParamStore&>(store), false, false);
  }

  Var operator()(const std::string& name);
  Graph& graph() { return g_; }
  ParamStore& store() { return store_; }
  bool update_running() const { return update_running_; }

 private:
  Graph& g_;
  ParamStore& store_;
  bool track_;
  bool update_running_;
  std::unordered_map<std::string, Var> bound_;
};

/// Xavier-uniform weight `prefix.W` (in x out) and, if bias, zero `prefix.b`.
void init_linear(ParamStore& store, const std::string& prefix, Index in, Index out, bool bias, Rng& rng);
Var apply_linear(Binder& p, const std::string& prefix, Var x);

/// Q/K/V/output projections, no biases.
void init_mha(ParamStore& store, const std::string& prefix, Index d, Rng& rng);
Var apply_mha(Binder& p, const std::string& prefix, Var q_in, Var kv_in, int n_heads, Index q_group,
              Index kv_group, const Mask* mask = nullptr);

/// gamma = 1, beta = 0 and non-trainable running_mean = 0, running_var = 1.
void init_batch_norm(ParamStore& store, const std::string& prefix, Index d);
Var apply_batch_norm(Binder& p, const std::string& prefix, Var x, BnMode mode, const BnSettings& bn);

}  // namespace dpp::nn
