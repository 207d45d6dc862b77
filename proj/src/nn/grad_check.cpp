// SPDX-License-Identifier: Apache-2.0

#include "dpp/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "dpp/common/errors.hpp"
#include "dpp/common/rng.hpp"

namespace dpp::nn {
namespace {

struct Eval {
  double value;
  std::uint64_t pattern;
};

Eval evaluate(const LossBuilder& loss, ParamStore& store) {
  Graph g;
  Var l = loss(g, store);
  const double v = g.scalar(l);
  if (!std::isfinite(v)) throw NumericError("grad_check: non-finite loss " + std::to_string(v));
  return {v, g.relu_pattern()};
}

}  // namespace

GradCheckResult grad_check(const LossBuilder& loss, ParamStore& store, const GradCheckOptions& opt) {
  require(opt.eps > 0.0, "grad_check: eps must be positive");
  store.zero_grad();
  std::uint64_t base_pattern = 0;
  {
    Graph g;
    Var l = loss(g, store);
    const double v = g.scalar(l);
    if (!std::isfinite(v)) throw NumericError("grad_check: non-finite loss " + std::to_string(v));
    base_pattern = g.relu_pattern();
    g.backward(l);
  }

  std::vector<std::pair<std::size_t, Index>> coords;
  for (std::size_t i = 0; i < store.size(); ++i) {
    const Tensor& t = store.tensor(i);
    if (!t.requires_grad) continue;
    for (Index j = 0; j < t.value.size(); ++j) coords.emplace_back(i, j);
  }
  if (coords.size() > opt.full_limit) {
    Rng rng(opt.seed);
    rng.shuffle(coords);
    const auto keep = static_cast<std::size_t>(std::ceil(opt.sample_fraction * static_cast<double>(coords.size())));
    coords.resize(std::max<std::size_t>(keep, 1));
    std::sort(coords.begin(), coords.end());
  }

  GradCheckResult res;
  for (auto [ti, j] : coords) {
    Tensor& t = store.tensor(ti);
    const double analytic = t.grad.data()[j];
    if (!std::isfinite(analytic)) throw NumericError("grad_check: non-finite gradient in " + store.name(ti));
    const double orig = t.value.data()[j];
    t.value.data()[j] = orig + opt.eps;
    const Eval plus = evaluate(loss, store);
    t.value.data()[j] = orig - opt.eps;
    const Eval minus = evaluate(loss, store);
    t.value.data()[j] = orig;
    if (plus.pattern != base_pattern || minus.pattern != base_pattern) {
      ++res.skipped_kinks;
      continue;
    }
    const double numeric = (plus.value - minus.value) / (2.0 * opt.eps);
    const double denom = std::max({std::abs(analytic), std::abs(numeric), opt.floor});
    const double err = std::abs(analytic - numeric) / denom;
    ++res.checked;
    if (res.worst_index < 0 || err > res.max_rel_error) {
      res.max_rel_error = err;
      res.worst_name = store.name(ti);
      res.worst_index = j;
      res.worst_analytic = analytic;
      res.worst_numeric = numeric;
    }
  }
  return res;
}

}  // namespace dpp::nn
