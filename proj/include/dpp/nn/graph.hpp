// SPDX-License-Identifier: Apache-2.0
//
// Tape for reverse-mode differentiation over the closed op set in ops.hpp.
// Nodes are appended in evaluation order; backward() walks them in reverse.

#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <vector>

#include "dpp/nn/tensor.hpp"

namespace dpp::nn {

struct Var {
  int id = -1;
};

class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, int self)>;

  /// Leaf that never receives a gradient.
  Var constant(Matrix value);

  /// Leaf bound to a stored tensor. If the tensor requires grad, backward()
  /// adds this leaf's gradient into tensor.grad.
  Var parameter(Tensor& tensor);

  /// Appends an op result. `fn` is kept only if some input is tracked.
  Var record(Matrix value, std::initializer_list<Var> inputs, BackwardFn fn);
  Var record(Matrix value, const std::vector<Var>& inputs, BackwardFn fn);

  const Matrix& value(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].value; }
  double scalar(Var v) const;
  bool tracks(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].tracked; }

  /// Gradient buffer of node `id`, zero-allocated on first use.
  Matrix& grad_buffer(int id);

  /// Gradient of the last backward() with respect to `v` (zeros if unreached).
  Matrix grad(Var v) const;

  /// Seeds d(loss)/d(loss) = 1 on a 1x1 node and propagates. Node gradients
  /// are recomputed from scratch on every call.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

  /// Running hash of every ReLU sign pattern seen by this graph; lets
  /// gradient checks detect perturbations that cross a kink.
  void note_relu_pattern(const Matrix& pre_activation);
  std::uint64_t relu_pattern() const { return relu_pattern_; }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool tracked = false;
    bool has_grad = false;
    Tensor* param = nullptr;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
  std::uint64_t relu_pattern_ = 0xCBF29CE484222325ULL;
};

}  // namespace dpp::nn
