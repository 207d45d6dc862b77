// SPDX-License-Identifier: Apache-2.0
//
// Differentiable ops. Every op reads its inputs from the graph, records one
// node and, when any input is tracked, a backward closure that accumulates
// into the inputs' gradient buffers.
//
// Row-grouped ops (attention, pointer_scores, group_*) treat a stacked
// matrix of B instances: rows [b*group, (b+1)*group) belong to instance b.

#pragma once

#include <vector>

#include "dpp/nn/graph.hpp"

namespace dpp::nn {

Var matmul(Graph& g, Var a, Var b);
Var add(Graph& g, Var a, Var b);
/// x (n x m) + bias (1 x m) broadcast over rows.
Var add_bias(Graph& g, Var x, Var bias);
/// x W + b with W (in x out) and b (1 x out).
Var linear(Graph& g, Var x, Var w, Var b);
Var relu(Graph& g, Var x);
Var tanh(Graph& g, Var x);
Var scale(Graph& g, Var x, double s);

struct BatchStats {
  Matrix mean;      // 1 x m
  Matrix variance;  // 1 x m, biased
};

/// Per-column normalisation over all rows using batch statistics.
/// Writes the statistics used into `stats` when non-null.
Var batch_norm_train(Graph& g, Var x, Var gamma, Var beta, double eps, BatchStats* stats);
/// Per-column normalisation with fixed statistics.
Var batch_norm_eval(Graph& g, Var x, Var gamma, Var beta, const Matrix& mean, const Matrix& variance,
                    double eps);

/// Scaled dot-product attention, heads concatenated (no output projection).
/// q: (B*q_group) x d, k/v: (B*kv_group) x d. `mask` (optional) is
/// (B*q_group) x kv_group; masked keys receive weight exactly 0.
Var attention(Graph& g, Var q, Var k, Var v, int n_heads, Index q_group, Index kv_group,
              const Mask* mask = nullptr);

/// Dot products q_r . k_j * s per instance: (B*q_group) x kv_group.
Var pointer_scores(Graph& g, Var q, Var k, Index q_group, Index kv_group, double s);

Var concat_rows(Graph& g, const std::vector<Var>& parts);
Var gather_rows(Graph& g, Var x, const std::vector<Index>& rows);
/// Broadcast each row of x (n x m) into `times` consecutive rows.
Var repeat_rows(Graph& g, Var x, Index times);
Var group_mean_rows(Graph& g, Var x, Index group);
Var group_sum_rows(Graph& g, Var x, Index group);

/// Row-wise log-softmax over allowed entries; masked entries hold -inf and
/// get no gradient. All-masked rows are a contract violation.
Var masked_log_softmax(Graph& g, Var logits, const Mask& mask);

/// Column vector of x(r, cols[r]).
Var pick_cols(Graph& g, Var x, const std::vector<Index>& cols);

Var sum_all(Graph& g, Var x);
Var mean_all(Graph& g, Var x);

/// |exp(l) - exp(t)| per entry for a column of log-probabilities l against
/// constant targets t, evaluated as exp(max) * (1 - exp(-|l - t|)).
Var prob_l1_gap(Graph& g, Var logp, const Matrix& target_logp);

/// exp(max(a,b)) * -expm1(-|a - b|), with 0 when both are -inf.
double prob_gap(double log_a, double log_b);

}  // namespace dpp::nn
