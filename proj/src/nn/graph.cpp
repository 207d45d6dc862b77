// SPDX-License-Identifier: Apache-2.0

#include "dpp/nn/graph.hpp"

#include "dpp/common/errors.hpp"

namespace dpp::nn {

Var Graph::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return {static_cast<int>(nodes_.size()) - 1};
}

Var Graph::parameter(Tensor& tensor) {
  Node n;
  n.value = tensor.value;
  n.tracked = tensor.requires_grad;
  n.param = tensor.requires_grad ? &tensor : nullptr;
  nodes_.push_back(std::move(n));
  return {static_cast<int>(nodes_.size()) - 1};
}

Var Graph::record(Matrix value, std::initializer_list<Var> inputs, BackwardFn fn) {
  return record(std::move(value), std::vector<Var>(inputs), std::move(fn));
}

Var Graph::record(Matrix value, const std::vector<Var>& inputs, BackwardFn fn) {
  Node n;
  n.value = std::move(value);
  for (Var in : inputs) n.tracked = n.tracked || tracks(in);
  if (n.tracked) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return {static_cast<int>(nodes_.size()) - 1};
}

double Graph::scalar(Var v) const {
  const Matrix& m = value(v);
  require(m.rows() == 1 && m.cols() == 1, "Graph::scalar: node is not 1x1");
  return m(0, 0);
}

Matrix& Graph::grad_buffer(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (!n.has_grad) {
    n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
    n.has_grad = true;
  }
  return n.grad;
}

Matrix Graph::grad(Var v) const {
  const Node& n = nodes_[static_cast<std::size_t>(v.id)];
  return n.has_grad ? n.grad : Matrix::Zero(n.value.rows(), n.value.cols());
}

void Graph::backward(Var loss) {
  require(value(loss).rows() == 1 && value(loss).cols() == 1, "Graph::backward: loss must be 1x1");
  for (auto& n : nodes_) {
    n.has_grad = false;
    n.grad.resize(0, 0);
  }
  if (!tracks(loss)) return;
  grad_buffer(loss.id)(0, 0) = 1.0;
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.has_grad) continue;
    if (n.backward) n.backward(*this, id);
    if (n.param) {
      Tensor& t = *n.param;
      if (t.grad.rows() != t.value.rows() || t.grad.cols() != t.value.cols())
        t.grad = Matrix::Zero(t.value.rows(), t.value.cols());
      t.grad += n.grad;
    }
  }
}

void Graph::note_relu_pattern(const Matrix& pre_activation) {
  const double* p = pre_activation.data();
  for (Index i = 0; i < pre_activation.size(); ++i) {
    relu_pattern_ ^= p[i] > 0.0 ? 0x9Bu : 0x31u;
    relu_pattern_ *= 0x100000001B3ULL;
  }
}

}  // namespace dpp::nn
