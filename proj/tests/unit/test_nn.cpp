// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "dpp/common/errors.hpp"
#include "dpp/common/rng.hpp"
#include "dpp/nn/adam.hpp"
#include "dpp/nn/container.hpp"
#include "dpp/nn/grad_check.hpp"
#include "dpp/nn/layers.hpp"
#include "dpp/nn/ops.hpp"

using namespace dpp;
using namespace dpp::nn;

namespace {

Matrix random_matrix(Index r, Index c, Rng& rng) {
  Matrix m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = 2 * rng.uniform01() - 1;
  return m;
}

}  // namespace

TEST_CASE("masked softmax of [0, 1]") {
  Matrix x(1, 3);
  x << 0.0, 1.0, 5.0;
  Mask m(1, 3);
  m.set(0, 2, false);
  const Matrix p = masked_softmax(x, m);
  CHECK(p(0, 0) == Catch::Approx(0.2689414213699951).epsilon(1e-12));
  CHECK(p(0, 1) == Catch::Approx(0.7310585786300049).epsilon(1e-12));
  CHECK(p(0, 2) == 0.0);
  Mask none(1, 3, 0);
  CHECK_THROWS_AS(masked_softmax(x, none), ContractViolation);
}

TEST_CASE("masked log-softmax gives -inf on masked entries and normalises") {
  Graph g;
  Matrix x(2, 4);
  x << 1, 2, 3, 4, -1, 0, 1e3, 2;
  Mask m(2, 4);
  m.set(0, 1, false);
  m.set(1, 2, false);
  const Matrix lp = g.value(masked_log_softmax(g, g.constant(x), m));
  CHECK(std::isinf(lp(0, 1)));
  CHECK(std::isinf(lp(1, 2)));
  for (Index r = 0; r < 2; ++r) {
    double s = 0;
    for (Index c = 0; c < 4; ++c) s += std::exp(lp(r, c));
    CHECK(s == Catch::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("prob_gap is stable in log space") {
  CHECK(prob_gap(-1000.0, -1000.0) == 0.0);
  const double ninf = -std::numeric_limits<double>::infinity();
  CHECK(prob_gap(ninf, ninf) == 0.0);
  CHECK(prob_gap(std::log(0.5), std::log(0.2)) == Catch::Approx(0.3).epsilon(1e-14));
  const double b = -80.0 - 1e-9;
  const double tiny = prob_gap(-80.0, b);
  CHECK(tiny / (std::exp(-80.0) * (-80.0 - b)) == Catch::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("batch norm in training mode gives zero mean and unit variance") {
  Rng rng(2);
  Graph g;
  Matrix x = random_matrix(7, 3, rng) * 5;
  BatchStats st;
  Matrix gamma = Matrix::Ones(1, 3), beta = Matrix::Zero(1, 3);
  const Matrix y = g.value(batch_norm_train(g, g.constant(x), g.constant(gamma), g.constant(beta), 1e-5, &st));
  for (Index c = 0; c < 3; ++c) {
    CHECK(std::abs(y.col(c).mean()) < 1e-12);
    CHECK((y.col(c).array() - y.col(c).mean()).square().mean() == Catch::Approx(1.0).epsilon(1e-5));
  }
  const Matrix ye = g.value(batch_norm_eval(g, g.constant(x), g.constant(gamma), g.constant(beta), st.mean, st.variance, 1e-5));
  CHECK((ye - y).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(batch_norm_train(g, g.constant(Matrix::Ones(1, 3)), g.constant(gamma), g.constant(beta), 1e-5, nullptr), ContractViolation);
}

TEST_CASE("running statistics follow the momentum update") {
  ParamStore s;
  init_batch_norm(s, "bn", 2);
  Matrix x(4, 2);
  x << 1, 0, 2, 0, 3, 0, 4, 4;
  Graph g;
  Binder p(g, s, true, true);
  apply_batch_norm(p, "bn", g.constant(x), BnMode::Train, BnSettings{1e-5, 0.1});
  CHECK(s.at("bn.running_mean").value(0, 0) == Catch::Approx(0.25));
  CHECK(s.at("bn.running_var").value(0, 0) == Catch::Approx(0.9 + 0.1 * (5.0 / 3.0)));
  CHECK_FALSE(s.at("bn.running_mean").requires_grad);
}

TEST_CASE("finite differences agree with reverse mode on every op") {
  Rng rng(5);
  ParamStore s;
  s.add("x", random_matrix(6, 4, rng));
  s.add("w", random_matrix(4, 4, rng));
  s.add("b", random_matrix(1, 4, rng));
  s.add("k", random_matrix(6, 4, rng));
  s.add("gamma", random_matrix(1, 4, rng));
  s.add("beta", random_matrix(1, 4, rng));
  Mask mask(6, 3);
  mask.set(0, 1, false);
  mask.set(4, 0, false);
  Matrix target = Matrix::Constant(6, 1, -2.0);
  const LossBuilder loss = [&](Graph& g, ParamStore& st) {
    Binder p(g, st, true);
    Var h = tanh(g, linear(g, p("x"), p("w"), p("b")));
    h = batch_norm_train(g, h, p("gamma"), p("beta"), 1e-5, nullptr);
    h = relu(g, add(g, h, scale(g, p("k"), 0.5)));
    Var att = attention(g, h, p("k"), p("k"), 2, 3, 3, &mask);
    Var sc = pointer_scores(g, att, p("k"), 3, 3, 0.5);
    Var lp = masked_log_softmax(g, sc, mask);
    Var picked = pick_cols(g, lp, {2, 2, 2, 2, 1, 1});
    Var pooled = group_mean_rows(g, concat_rows(g, {h, repeat_rows(g, gather_rows(g, h, {0, 5}), 3)}), 3);
    return add(g, add(g, sum_all(g, picked), mean_all(g, pooled)), sum_all(g, prob_l1_gap(g, picked, target)));
  };
  const auto r = grad_check(loss, s);
  CHECK(r.checked > 0);
  CHECK(r.max_rel_error < 1e-6);
}

TEST_CASE("adam applies one bias-corrected step") {
  ParamStore s;
  Tensor& t = s.add("w", Matrix::Constant(1, 2, 1.0));
  t.grad = Matrix(1, 2);
  t.grad << 2.0, -0.5;
  Adam opt(AdamConfig{0.1});
  opt.step(s);
  CHECK(t.value(0, 0) == Catch::Approx(0.9).epsilon(1e-6));
  CHECK(t.value(0, 1) == Catch::Approx(1.1).epsilon(1e-6));
}

TEST_CASE("container round-trips bit-exactly and rejects damage") {
  Rng rng(8);
  ParamStore s;
  s.add("a", random_matrix(3, 2, rng));
  s.add("b.running", random_matrix(1, 2, rng), false);
  s.at("a").value(0, 0) = -0.0;
  const std::string cfg = "{\"x\":1}";
  const std::string bytes = encode_container(cfg, s);
  const Container c = decode_container(bytes);
  CHECK(c.config == cfg);
  CHECK(c.store.identical_to(s));
  CHECK(std::signbit(c.store.at("a").value(0, 0)));
  CHECK(encode_container(c.config, c.store) == bytes);
  CHECK_THROWS_AS(decode_container(bytes.substr(0, bytes.size() - 3)), IoError);
  CHECK_THROWS_AS(decode_container(bytes + "x"), IoError);
  std::string flipped = bytes;
  flipped[26] ^= 1;
  CHECK_THROWS_AS(decode_container(flipped), IoError);
  std::string magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(decode_container(magic), IoError);
}
