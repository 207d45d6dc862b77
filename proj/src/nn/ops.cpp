// SPDX-License-Identifier: Apache-2.0

#include "dpp/nn/ops.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "dpp/common/errors.hpp"

namespace dpp::nn {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  require(a.rows() == b.rows() && a.cols() == b.cols(),
          std::string(op) + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b));
}

void accumulate(Graph& g, Var v, const Matrix& delta) {
  if (g.tracks(v)) g.grad_buffer(v.id) += delta;
}

}  // namespace

Var matmul(Graph& g, Var a, Var b) {
  const Matrix& A = g.value(a);
  const Matrix& B = g.value(b);
  require(A.cols() == B.rows(), "matmul: shape mismatch " + shape_str(A) + " * " + shape_str(B));
  Matrix out = A * B;
  return g.record(std::move(out), {a, b}, [a, b](Graph& gr, int self) {
    const Matrix& G = gr.grad_buffer(self);
    if (gr.tracks(a)) gr.grad_buffer(a.id).noalias() += G * gr.value(b).transpose();
    if (gr.tracks(b)) gr.grad_buffer(b.id).noalias() += gr.value(a).transpose() * G;
  });
}

Var add(Graph& g, Var a, Var b) {
  require_same_shape(g.value(a), g.value(b), "add");
  Matrix out = g.value(a) + g.value(b);
  return g.record(std::move(out), {a, b}, [a, b](Graph& gr, int self) {
    const Matrix G = gr.grad_buffer(self);
    accumulate(gr, a, G);
    accumulate(gr, b, G);
  });
}

Var add_bias(Graph& g, Var x, Var bias) {
  const Matrix& X = g.value(x);
  const Matrix& B = g.value(bias);
  require(B.rows() == 1 && B.cols() == X.cols(), "add_bias: bias must be 1x" + std::to_string(X.cols()) +
                                                     ", got " + shape_str(B));
  Matrix out = X.rowwise() + B.row(0);
  return g.record(std::move(out), {x, bias}, [x, bias](Graph& gr, int self) {
    const Matrix& G = gr.grad_buffer(self);
    accumulate(gr, x, G);
    if (gr.tracks(bias)) gr.grad_buffer(bias.id) += G.colwise().sum();
  });
}

Var linear(Graph& g, Var x, Var w, Var b) {
  const Matrix& X = g.value(x);
  const Matrix& W = g.value(w);
  const Matrix& B = g.value(b);
  require(X.cols() == W.rows(), "linear: input " + shape_str(X) + " vs weight " + shape_str(W));
  require(B.rows() == 1 && B.cols() == W.cols(), "linear: bias " + shape_str(B) + " vs weight " + shape_str(W));
  Matrix out = X * W;
  out.rowwise() += B.row(0);
  return g.record(std::move(out), {x, w, b}, [x, w, b](Graph& gr, int self) {
    const Matrix& G = gr.grad_buffer(self);
    if (gr.tracks(x)) gr.grad_buffer(x.id).noalias() += G * gr.value(w).transpose();
    if (gr.tracks(w)) gr.grad_buffer(w.id).noalias() += gr.value(x).transpose() * G;
    if (gr.tracks(b)) gr.grad_buffer(b.id) += G.colwise().sum();
  });
}

Var relu(Graph& g, Var x) {
  const Matrix& X = g.value(x);
  g.note_relu_pattern(X);
  Matrix out = X.cwiseMax(0.0);
  return g.record(std::move(out), {x}, [x](Graph& gr, int self) {
    if (!gr.tracks(x)) return;
    const Matrix& G = gr.grad_buffer(self);
    Matrix gate = (gr.value(x).array() > 0.0).cast<double>().matrix();
    gr.grad_buffer(x.id) += G.cwiseProduct(gate);
  });
}

Var tanh(Graph& g, Var x) {
  Matrix out = g.value(x).array().tanh().matrix();
  return g.record(std::move(out), {x}, [x](Graph& gr, int self) {
    if (!gr.tracks(x)) return;
    const Matrix& G = gr.grad_buffer(self);
    const Matrix& Y = gr.value(Var{self});
    gr.grad_buffer(x.id).array() += G.array() * (1.0 - Y.array().square());
  });
}

Var scale(Graph& g, Var x, double s) {
  Matrix out = g.value(x) * s;
  return g.record(std::move(out), {x}, [x, s](Graph& gr, int self) {
    if (gr.tracks(x)) gr.grad_buffer(x.id) += gr.grad_buffer(self) * s;
  });
}

Var batch_norm_train(Graph& g, Var x, Var gamma, Var beta, double eps, BatchStats* stats) {
  const Matrix& X = g.value(x);
  const Index n = X.rows();
  require(n >= 2, "batch_norm: training mode needs a batch of at least 2 rows, got " + std::to_string(n));
  require(g.value(gamma).rows() == 1 && g.value(gamma).cols() == X.cols(), "batch_norm: gamma shape");
  require(g.value(beta).rows() == 1 && g.value(beta).cols() == X.cols(), "batch_norm: beta shape");

  Matrix mean = X.colwise().mean();
  Matrix centered = X.rowwise() - mean.row(0);
  Matrix var = centered.array().square().colwise().sum().matrix() / static_cast<double>(n);
  Matrix inv_std = (var.array() + eps).rsqrt().matrix();
  Matrix xhat = centered.array().rowwise() * inv_std.row(0).array();
  Matrix out = (xhat.array().rowwise() * g.value(gamma).row(0).array()).matrix();
  out.rowwise() += g.value(beta).row(0);
  if (stats) {
    stats->mean = mean;
    stats->variance = var;
  }
  return g.record(std::move(out), {x, gamma, beta},
                  [x, gamma, beta, xhat = std::move(xhat), inv_std = std::move(inv_std)](Graph& gr, int self) {
                    const Matrix& G = gr.grad_buffer(self);
                    if (gr.tracks(beta)) gr.grad_buffer(beta.id) += G.colwise().sum();
                    if (gr.tracks(gamma)) gr.grad_buffer(gamma.id) += G.cwiseProduct(xhat).colwise().sum();
                    if (!gr.tracks(x)) return;
                    const double n_rows = static_cast<double>(G.rows());
                    Matrix dxhat = G.array().rowwise() * gr.value(gamma).row(0).array();
                    Matrix sum_d = dxhat.colwise().sum();
                    Matrix sum_dx = dxhat.cwiseProduct(xhat).colwise().sum();
                    Matrix dx = (dxhat * n_rows).rowwise() - sum_d.row(0);
                    dx -= (xhat.array().rowwise() * sum_dx.row(0).array()).matrix();
                    dx.array().rowwise() *= (inv_std.row(0).array() / n_rows);
                    gr.grad_buffer(x.id) += dx;
                  });
}

Var batch_norm_eval(Graph& g, Var x, Var gamma, Var beta, const Matrix& mean, const Matrix& variance,
                    double eps) {
  const Matrix& X = g.value(x);
  require(mean.rows() == 1 && mean.cols() == X.cols() && variance.rows() == 1 && variance.cols() == X.cols(),
          "batch_norm: running statistics shape");
  Matrix inv_std = (variance.array() + eps).rsqrt().matrix();
  Matrix coef = g.value(gamma).cwiseProduct(inv_std);
  Matrix out = ((X.rowwise() - mean.row(0)).array().rowwise() * coef.row(0).array()).matrix();
  out.rowwise() += g.value(beta).row(0);
  return g.record(std::move(out), {x, gamma, beta},
                  [x, gamma, beta, mean, inv_std, coef](Graph& gr, int self) {
                    const Matrix& G = gr.grad_buffer(self);
                    if (gr.tracks(beta)) gr.grad_buffer(beta.id) += G.colwise().sum();
                    if (gr.tracks(gamma)) {
                      Matrix xhat = (gr.value(x).rowwise() - mean.row(0)).array().rowwise() * inv_std.row(0).array();
                      gr.grad_buffer(gamma.id) += G.cwiseProduct(xhat).colwise().sum();
                    }
                    if (gr.tracks(x)) gr.grad_buffer(x.id).array() += G.array().rowwise() * coef.row(0).array();
                  });
}

Var attention(Graph& g, Var q, Var k, Var v, int n_heads, Index q_group, Index kv_group, const Mask* mask) {
  const Matrix& Q = g.value(q);
  const Matrix& K = g.value(k);
  const Matrix& V = g.value(v);
  const Index d = Q.cols();
  require(n_heads >= 1 && d % n_heads == 0,
          "attention: model dim " + std::to_string(d) + " not divisible by " + std::to_string(n_heads) + " heads");
  require(K.cols() == d && V.cols() == d, "attention: q/k/v width mismatch");
  require(K.rows() == V.rows(), "attention: key/value row mismatch");
  require(q_group >= 1 && kv_group >= 1 && Q.rows() % q_group == 0 && K.rows() % kv_group == 0 &&
              Q.rows() / q_group == K.rows() / kv_group,
          "attention: group sizes do not match row counts");
  if (mask) require(mask->rows == Q.rows() && mask->cols == kv_group, "attention: mask shape");

  const Index batch = Q.rows() / q_group;
  const Index dh = d / n_heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));

  // Attention weights per (instance, head), stored for the backward pass.
  std::vector<Matrix> weights(static_cast<std::size_t>(batch * n_heads));
  Matrix out(Q.rows(), d);
  for (Index b = 0; b < batch; ++b) {
    Mask local;
    if (mask) {
      local = Mask(q_group, kv_group);
      for (Index r = 0; r < q_group; ++r)
        for (Index c = 0; c < kv_group; ++c) local.set(r, c, mask->at(b * q_group + r, c));
    }
    for (int h = 0; h < n_heads; ++h) {
      auto Qh = Q.block(b * q_group, h * dh, q_group, dh);
      auto Kh = K.block(b * kv_group, h * dh, kv_group, dh);
      auto Vh = V.block(b * kv_group, h * dh, kv_group, dh);
      Matrix scores = (Qh * Kh.transpose()) * inv_sqrt;
      Matrix p = mask ? masked_softmax(scores, local) : masked_softmax(scores, Mask(q_group, kv_group));
      out.block(b * q_group, h * dh, q_group, dh).noalias() = p * Vh;
      weights[static_cast<std::size_t>(b * n_heads + h)] = std::move(p);
    }
  }

  return g.record(std::move(out), {q, k, v},
                  [q, k, v, n_heads, q_group, kv_group, batch, dh, inv_sqrt,
                   weights = std::move(weights)](Graph& gr, int self) {
                    const Matrix& G = gr.grad_buffer(self);
                    const Matrix& Qv = gr.value(q);
                    const Matrix& Kv = gr.value(k);
                    const Matrix& Vv = gr.value(v);
                    const bool tq = gr.tracks(q), tk = gr.tracks(k), tv = gr.tracks(v);
                    for (Index b = 0; b < batch; ++b) {
                      for (int h = 0; h < n_heads; ++h) {
                        const Matrix& p = weights[static_cast<std::size_t>(b * n_heads + h)];
                        auto Gh = G.block(b * q_group, h * dh, q_group, dh);
                        if (tv) gr.grad_buffer(v.id).block(b * kv_group, h * dh, kv_group, dh).noalias() +=
                            p.transpose() * Gh;
                        if (!tq && !tk) continue;
                        Matrix dp = Gh * Vv.block(b * kv_group, h * dh, kv_group, dh).transpose();
                        Matrix rowdot = dp.cwiseProduct(p).rowwise().sum();
                        Matrix ds = p.cwiseProduct(dp.colwise() - rowdot.col(0)) * inv_sqrt;
                        if (tq) gr.grad_buffer(q.id).block(b * q_group, h * dh, q_group, dh).noalias() +=
                            ds * Kv.block(b * kv_group, h * dh, kv_group, dh);
                        if (tk) gr.grad_buffer(k.id).block(b * kv_group, h * dh, kv_group, dh).noalias() +=
                            ds.transpose() * Qv.block(b * q_group, h * dh, q_group, dh);
                      }
                    }
                  });
}

Var pointer_scores(Graph& g, Var q, Var k, Index q_group, Index kv_group, double s) {
  const Matrix& Q = g.value(q);
  const Matrix& K = g.value(k);
  require(Q.cols() == K.cols(), "pointer_scores: width mismatch");
  require(q_group >= 1 && kv_group >= 1 && Q.rows() % q_group == 0 && K.rows() % kv_group == 0 &&
              Q.rows() / q_group == K.rows() / kv_group,
          "pointer_scores: group sizes do not match row counts");
  const Index batch = Q.rows() / q_group;
  Matrix out(Q.rows(), kv_group);
  for (Index b = 0; b < batch; ++b)
    out.block(b * q_group, 0, q_group, kv_group).noalias() =
        Q.middleRows(b * q_group, q_group) * K.middleRows(b * kv_group, kv_group).transpose() * s;
  return g.record(std::move(out), {q, k}, [q, k, q_group, kv_group, batch, s](Graph& gr, int self) {
    const Matrix& G = gr.grad_buffer(self);
    for (Index b = 0; b < batch; ++b) {
      auto Gb = G.middleRows(b * q_group, q_group);
      if (gr.tracks(q))
        gr.grad_buffer(q.id).middleRows(b * q_group, q_group).noalias() +=
            Gb * gr.value(k).middleRows(b * kv_group, kv_group) * s;
      if (gr.tracks(k))
        gr.grad_buffer(k.id).middleRows(b * kv_group, kv_group).noalias() +=
            Gb.transpose() * gr.value(q).middleRows(b * q_group, q_group) * s;
    }
  });
}

Var concat_rows(Graph& g, const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_rows: no inputs");
  const Index cols = g.value(parts[0]).cols();
  Index rows = 0;
  for (Var p : parts) {
    require(g.value(p).cols() == cols, "concat_rows: column mismatch");
    rows += g.value(p).rows();
  }
  Matrix out(rows, cols);
  Index at = 0;
  for (Var p : parts) {
    out.middleRows(at, g.value(p).rows()) = g.value(p);
    at += g.value(p).rows();
  }
  return g.record(std::move(out), parts, [parts](Graph& gr, int self) {
    const Matrix& G = gr.grad_buffer(self);
    Index off = 0;
    for (Var p : parts) {
      const Index r = gr.value(p).rows();
      if (gr.tracks(p)) gr.grad_buffer(p.id) += G.middleRows(off, r);
      off += r;
    }
  });
}

Var gather_rows(Graph& g, Var x, const std::vector<Index>& rows) {
  const Matrix& X = g.value(x);
  Matrix out(static_cast<Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] >= 0 && rows[i] < X.rows(), "gather_rows: index out of range");
    out.row(static_cast<Index>(i)) = X.row(rows[i]);
  }
  return g.record(std::move(out), {x}, [x, rows](Graph& gr, int self) {
    if (!gr.tracks(x)) return;
    const Matrix& G = gr.grad_buffer(self);
    Matrix& dx = gr.grad_buffer(x.id);
    for (std::size_t i = 0; i < rows.size(); ++i) dx.row(rows[i]) += G.row(static_cast<Index>(i));
  });
}

Var repeat_rows(Graph& g, Var x, Index times) {
  require(times >= 1, "repeat_rows: times must be positive");
  const Matrix& X = g.value(x);
  Matrix out(X.rows() * times, X.cols());
  for (Index r = 0; r < X.rows(); ++r)
    for (Index t = 0; t < times; ++t) out.row(r * times + t) = X.row(r);
  return g.record(std::move(out), {x}, [x, times](Graph& gr, int self) {
    if (!gr.tracks(x)) return;
    const Matrix& G = gr.grad_buffer(self);
    Matrix& dx = gr.grad_buffer(x.id);
    for (Index r = 0; r < dx.rows(); ++r)
      for (Index t = 0; t < times; ++t) dx.row(r) += G.row(r * times + t);
  });
}

namespace {

Var group_reduce(Graph& g, Var x, Index group, bool mean) {
  const Matrix& X = g.value(x);
  require(group >= 1 && X.rows() % group == 0, "group reduction: rows not divisible by group");
  const Index n = X.rows() / group;
  const double w = mean ? 1.0 / static_cast<double>(group) : 1.0;
  Matrix out(n, X.cols());
  for (Index i = 0; i < n; ++i) out.row(i) = X.middleRows(i * group, group).colwise().sum() * w;
  return g.record(std::move(out), {x}, [x, group, n, w](Graph& gr, int self) {
    if (!gr.tracks(x)) return;
    const Matrix& G = gr.grad_buffer(self);
    Matrix& dx = gr.grad_buffer(x.id);
    for (Index i = 0; i < n; ++i)
      dx.middleRows(i * group, group).rowwise() += G.row(i) * w;
  });
}

}  // namespace

Var group_mean_rows(Graph& g, Var x, Index group) { return group_reduce(g, x, group, true); }
Var group_sum_rows(Graph& g, Var x, Index group) { return group_reduce(g, x, group, false); }

Var masked_log_softmax(Graph& g, Var logits, const Mask& mask) {
  const Matrix& L = g.value(logits);
  require(mask.rows == L.rows() && mask.cols == L.cols(), "masked_log_softmax: mask shape");
  Matrix out(L.rows(), L.cols());
  Matrix probs = Matrix::Zero(L.rows(), L.cols());
  for (Index r = 0; r < L.rows(); ++r) {
    double mx = kNegInf;
    bool any = false;
    for (Index c = 0; c < L.cols(); ++c) {
      if (!mask.at(r, c)) continue;
      if (!std::isfinite(L(r, c))) throw NumericError("masked_log_softmax: non-finite logit in row " + std::to_string(r));
      mx = std::max(mx, L(r, c));
      any = true;
    }
    require(any, "masked_log_softmax: row " + std::to_string(r) + " has no allowed entry");
    double sum = 0.0;
    for (Index c = 0; c < L.cols(); ++c)
      if (mask.at(r, c)) sum += std::exp(L(r, c) - mx);
    const double log_z = mx + std::log(sum);
    for (Index c = 0; c < L.cols(); ++c) {
      if (mask.at(r, c)) {
        out(r, c) = L(r, c) - log_z;
        probs(r, c) = std::exp(out(r, c));
      } else {
        out(r, c) = kNegInf;
      }
    }
  }
  return g.record(std::move(out), {logits}, [logits, mask, probs = std::move(probs)](Graph& gr, int self) {
    if (!gr.tracks(logits)) return;
    const Matrix& G = gr.grad_buffer(self);
    Matrix& dx = gr.grad_buffer(logits.id);
    for (Index r = 0; r < G.rows(); ++r) {
      double total = 0.0;
      for (Index c = 0; c < G.cols(); ++c)
        if (mask.at(r, c)) total += G(r, c);
      for (Index c = 0; c < G.cols(); ++c)
        if (mask.at(r, c)) dx(r, c) += G(r, c) - probs(r, c) * total;
    }
  });
}

Var pick_cols(Graph& g, Var x, const std::vector<Index>& cols) {
  const Matrix& X = g.value(x);
  require(static_cast<Index>(cols.size()) == X.rows(), "pick_cols: one column index per row required");
  Matrix out(X.rows(), 1);
  for (Index r = 0; r < X.rows(); ++r) {
    const Index c = cols[static_cast<std::size_t>(r)];
    require(c >= 0 && c < X.cols(), "pick_cols: column out of range");
    out(r, 0) = X(r, c);
  }
  return g.record(std::move(out), {x}, [x, cols](Graph& gr, int self) {
    if (!gr.tracks(x)) return;
    const Matrix& G = gr.grad_buffer(self);
    Matrix& dx = gr.grad_buffer(x.id);
    for (Index r = 0; r < G.rows(); ++r) dx(r, cols[static_cast<std::size_t>(r)]) += G(r, 0);
  });
}

Var sum_all(Graph& g, Var x) {
  Matrix out(1, 1);
  out(0, 0) = g.value(x).sum();
  return g.record(std::move(out), {x}, [x](Graph& gr, int self) {
    if (gr.tracks(x)) gr.grad_buffer(x.id).array() += gr.grad_buffer(self)(0, 0);
  });
}

Var mean_all(Graph& g, Var x) {
  const double n = static_cast<double>(g.value(x).size());
  require(n > 0, "mean_all: empty input");
  Matrix out(1, 1);
  out(0, 0) = g.value(x).sum() / n;
  return g.record(std::move(out), {x}, [x, n](Graph& gr, int self) {
    if (gr.tracks(x)) gr.grad_buffer(x.id).array() += gr.grad_buffer(self)(0, 0) / n;
  });
}

double prob_gap(double log_a, double log_b) {
  if (log_a == kNegInf && log_b == kNegInf) return 0.0;
  const double hi = std::max(log_a, log_b);
  const double diff = std::abs(log_a - log_b);
  return std::exp(hi) * -std::expm1(-diff);
}

Var prob_l1_gap(Graph& g, Var logp, const Matrix& target_logp) {
  const Matrix& L = g.value(logp);
  require_same_shape(L, target_logp, "prob_l1_gap");
  Matrix out(L.rows(), L.cols());
  for (Index i = 0; i < L.size(); ++i) out.data()[i] = prob_gap(L.data()[i], target_logp.data()[i]);
  return g.record(std::move(out), {logp}, [logp, target_logp](Graph& gr, int self) {
    if (!gr.tracks(logp)) return;
    const Matrix& G = gr.grad_buffer(self);
    const Matrix& Lv = gr.value(logp);
    Matrix& dx = gr.grad_buffer(logp.id);
    for (Index i = 0; i < G.size(); ++i) {
      const double l = Lv.data()[i];
      const double t = target_logp.data()[i];
      const double sign = l > t ? 1.0 : (l < t ? -1.0 : 0.0);
      dx.data()[i] += G.data()[i] * sign * std::exp(l);
    }
  });
}

}  // namespace dpp::nn
