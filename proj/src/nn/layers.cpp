// SPDX-License-Identifier: Apache-2.0

#include "dpp/nn/layers.hpp"

#include <cmath>

#include "dpp/common/errors.hpp"

namespace dpp::nn {

Var Binder::operator()(const std::string& name) {
  auto it = bound_.find(name);
  if (it != bound_.end()) return it->second;
  Tensor& t = store_.at(name);
  Var v = track_ && t.requires_grad ? g_.parameter(t) : g_.constant(t.value);
  bound_.emplace(name, v);
  return v;
}

void init_linear(ParamStore& store, const std::string& prefix, Index in, Index out, bool bias, Rng& rng) {
  require(in > 0 && out > 0, "init_linear: empty layer " + prefix);
  const double a = std::sqrt(6.0 / static_cast<double>(in + out));
  Matrix w(in, out);
  for (Index i = 0; i < w.size(); ++i) w.data()[i] = (2.0 * rng.uniform01() - 1.0) * a;
  store.add(prefix + ".W", std::move(w));
  if (bias) store.add(prefix + ".b", Matrix::Zero(1, out));
}

Var apply_linear(Binder& p, const std::string& prefix, Var x) {
  Graph& g = p.graph();
  Var w = p(prefix + ".W");
  if (p.store().contains(prefix + ".b")) return linear(g, x, w, p(prefix + ".b"));
  return matmul(g, x, w);
}

void init_mha(ParamStore& store, const std::string& prefix, Index d, Rng& rng) {
  for (const char* m : {".q", ".k", ".v", ".o"}) init_linear(store, prefix + m, d, d, false, rng);
}

Var apply_mha(Binder& p, const std::string& prefix, Var q_in, Var kv_in, int n_heads, Index q_group,
              Index kv_group, const Mask* mask) {
  Graph& g = p.graph();
  Var q = apply_linear(p, prefix + ".q", q_in);
  Var k = apply_linear(p, prefix + ".k", kv_in);
  Var v = apply_linear(p, prefix + ".v", kv_in);
  Var heads = attention(g, q, k, v, n_heads, q_group, kv_group, mask);
  return apply_linear(p, prefix + ".o", heads);
}

void init_batch_norm(ParamStore& store, const std::string& prefix, Index d) {
  store.add(prefix + ".gamma", Matrix::Ones(1, d));
  store.add(prefix + ".beta", Matrix::Zero(1, d));
  store.add(prefix + ".running_mean", Matrix::Zero(1, d), false);
  store.add(prefix + ".running_var", Matrix::Ones(1, d), false);
}

Var apply_batch_norm(Binder& p, const std::string& prefix, Var x, BnMode mode, const BnSettings& bn) {
  Graph& g = p.graph();
  Var gamma = p(prefix + ".gamma");
  Var beta = p(prefix + ".beta");
  Tensor& rm = p.store().at(prefix + ".running_mean");
  Tensor& rv = p.store().at(prefix + ".running_var");
  if (mode == BnMode::Eval) return batch_norm_eval(g, x, gamma, beta, rm.value, rv.value, bn.eps);

  BatchStats stats;
  Var y = batch_norm_train(g, x, gamma, beta, bn.eps, &stats);
  if (p.update_running()) {
    const double n = static_cast<double>(g.value(x).rows());
    rm.value = (1.0 - bn.momentum) * rm.value + bn.momentum * stats.mean;
    rv.value = (1.0 - bn.momentum) * rv.value + bn.momentum * stats.variance * (n / (n - 1.0));
  }
  return y;
}

}  // namespace dpp::nn
