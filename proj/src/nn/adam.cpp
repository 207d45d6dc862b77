// SPDX-License-Identifier: Apache-2.0

#include "dpp/nn/adam.hpp"

#include <cmath>

#include "dpp/common/errors.hpp"

namespace dpp::nn {

void Adam::step(ParamStore& store) {
  if (m_.empty()) {
    m_.resize(store.size());
    v_.resize(store.size());
    for (std::size_t i = 0; i < store.size(); ++i) {
      const Matrix& w = store.tensor(i).value;
      m_[i] = Matrix::Zero(w.rows(), w.cols());
      v_[i] = Matrix::Zero(w.rows(), w.cols());
    }
  }
  require(m_.size() == store.size(), "Adam: parameter store changed between steps");
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < store.size(); ++i) {
    Tensor& t = store.tensor(i);
    if (!t.requires_grad) continue;
    require(t.grad.rows() == t.value.rows() && t.grad.cols() == t.value.cols(),
            "Adam: gradient shape mismatch for " + store.name(i));
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * t.grad;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * t.grad.cwiseAbs2();
    t.value.array() -= cfg_.lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + cfg_.eps);
  }
}

}  // namespace dpp::nn
