// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace dpp::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

/// Dense row-major 2-D tensor. Vectors are 1 x n, scalars 1 x 1.
struct Tensor {
  Matrix value;
  Matrix grad;
  bool requires_grad = true;

  std::array<Index, 2> shape() const { return {value.rows(), value.cols()}; }
};

/// Named tensors in insertion order. Trainable parameters and
/// non-trainable buffers (normalisation running statistics) live together
/// so a checkpoint captures both.
class ParamStore {
 public:
  Tensor& add(const std::string& name, Matrix init, bool trainable = true);

  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;

  std::size_t size() const { return entries_.size(); }
  const std::string& name(std::size_t i) const { return entries_[i].first; }
  Tensor& tensor(std::size_t i) { return entries_[i].second; }
  const Tensor& tensor(std::size_t i) const { return entries_[i].second; }

  /// Number of trainable scalars.
  std::size_t trainable_size() const;

  void zero_grad();

  /// Bitwise equality of names, flags and values.
  bool identical_to(const ParamStore& other) const;

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Row-by-row selection mask (1 = allowed).
struct Mask {
  Index rows = 0;
  Index cols = 0;
  std::vector<std::uint8_t> allowed;

  Mask() = default;
  Mask(Index r, Index c, std::uint8_t fill = 1) : rows(r), cols(c), allowed(static_cast<std::size_t>(r * c), fill) {}

  bool at(Index r, Index c) const { return allowed[static_cast<std::size_t>(r * cols + c)] != 0; }
  void set(Index r, Index c, bool v) { allowed[static_cast<std::size_t>(r * cols + c)] = v ? 1 : 0; }
};

/// Row-wise softmax restricted to allowed entries. Masked entries are
/// exactly 0. Max-subtracted. Throws ContractViolation on an all-masked row.
Matrix masked_softmax(const Matrix& logits, const Mask& mask);

}  // namespace dpp::nn
