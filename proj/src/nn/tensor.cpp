// SPDX-License-Identifier: Apache-2.0

#include "dpp/nn/tensor.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "dpp/common/errors.hpp"

namespace dpp::nn {

Tensor& ParamStore::add(const std::string& name, Matrix init, bool trainable) {
  require(!contains(name), "ParamStore: duplicate name " + name);
  index_.emplace(name, entries_.size());
  Tensor t;
  t.value = std::move(init);
  t.grad = Matrix::Zero(t.value.rows(), t.value.cols());
  t.requires_grad = trainable;
  entries_.emplace_back(name, std::move(t));
  return entries_.back().second;
}

Tensor& ParamStore::at(const std::string& name) {
  auto it = index_.find(name);
  require(it != index_.end(), "ParamStore: unknown tensor " + name);
  return entries_[it->second].second;
}

const Tensor& ParamStore::at(const std::string& name) const {
  auto it = index_.find(name);
  require(it != index_.end(), "ParamStore: unknown tensor " + name);
  return entries_[it->second].second;
}

std::size_t ParamStore::trainable_size() const {
  std::size_t n = 0;
  for (const auto& [name, t] : entries_)
    if (t.requires_grad) n += static_cast<std::size_t>(t.value.size());
  return n;
}

void ParamStore::zero_grad() {
  for (auto& [name, t] : entries_) t.grad.setZero(t.value.rows(), t.value.cols());
}

bool ParamStore::identical_to(const ParamStore& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& [na, a] = entries_[i];
    const auto& [nb, b] = other.entries_[i];
    if (na != nb || a.requires_grad != b.requires_grad || a.value.rows() != b.value.rows() ||
        a.value.cols() != b.value.cols())
      return false;
    if (std::memcmp(a.value.data(), b.value.data(), sizeof(double) * static_cast<std::size_t>(a.value.size())) != 0)
      return false;
  }
  return true;
}

Matrix masked_softmax(const Matrix& logits, const Mask& mask) {
  require(mask.rows == logits.rows() && mask.cols == logits.cols(), "masked_softmax: mask shape mismatch");
  Matrix out = Matrix::Zero(logits.rows(), logits.cols());
  for (Index r = 0; r < logits.rows(); ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (Index c = 0; c < logits.cols(); ++c) {
      if (!mask.at(r, c)) continue;
      if (!std::isfinite(logits(r, c))) throw NumericError("masked_softmax: non-finite logit");
      mx = std::max(mx, logits(r, c));
      any = true;
    }
    require(any, "masked_softmax: every entry of a row is masked");
    double total = 0.0;
    for (Index c = 0; c < logits.cols(); ++c)
      if (mask.at(r, c)) total += (out(r, c) = std::exp(logits(r, c) - mx));
    out.row(r) /= total;
  }
  return out;
}

}  // namespace dpp::nn
