// SPDX-License-Identifier: Apache-2.0

#include "dpp/model/devformer.hpp"

#include <cmath>
#include <string>

#include "dpp/common/errors.hpp"
#include "dpp/common/hash.hpp"
#include "dpp/nn/container.hpp"

namespace dpp::model {

using nn::Binder;
using nn::BnMode;
using nn::Graph;
using nn::Index;
using nn::Mask;
using nn::Var;

namespace {

std::string layer(int i, const char* part) { return "enc.l" + std::to_string(i) + "." + part; }

Var mlp2(Binder& p, const std::string& prefix, Var x) {
  Graph& g = p.graph();
  return nn::apply_linear(p, prefix + ".2", nn::relu(g, nn::apply_linear(p, prefix + ".1", x)));
}

}  // namespace

Matrix ppe_features(const env::Problem& problem, PpeMode mode) {
  problem.validate();
  const auto [px, py] = env::normalized_position(problem, problem.probe);
  const int cols = mode == PpeMode::Norm ? 1 : 3;
  Matrix out(problem.n_ports(), cols);
  for (int i = 0; i < problem.n_ports(); ++i) {
    const auto [x, y] = env::normalized_position(problem, i);
    const double dx = x - px;
    const double dy = y - py;
    const double dist = std::sqrt(dx * dx + dy * dy);
    if (mode == PpeMode::Norm) {
      out(i, 0) = dist;
    } else {
      out(i, 0) = dx;
      out(i, 1) = dy;
      out(i, 2) = dist;
    }
  }
  return out;
}

DevFormer::DevFormer(ModelConfig cfg, std::uint64_t init_seed) : cfg_(cfg) {
  cfg_.validate();
  init_params(init_seed);
}

DevFormer::DevFormer(ModelConfig cfg, nn::ParamStore params) : cfg_(cfg) {
  cfg_.validate();
  DevFormer reference(cfg_, 0);
  const nn::ParamStore& want = reference.params_;
  require(params.size() == want.size(), "DevFormer: checkpoint has " + std::to_string(params.size()) +
                                            " tensors, config expects " + std::to_string(want.size()));
  for (std::size_t i = 0; i < want.size(); ++i) {
    const std::string& name = want.name(i);
    require(params.contains(name), "DevFormer: checkpoint lacks tensor " + name);
    const nn::Tensor& got = params.at(name);
    require(got.value.rows() == want.tensor(i).value.rows() && got.value.cols() == want.tensor(i).value.cols() &&
                got.requires_grad == want.tensor(i).requires_grad,
            "DevFormer: tensor " + name + " does not match the config");
    require(got.value.allFinite(), "DevFormer: tensor " + name + " holds non-finite values");
  }
  params_ = std::move(params);
}

void DevFormer::init_params(std::uint64_t seed) {
  Rng rng(seed);
  const Index d = cfg_.d;
  nn::init_linear(params_, "enc.node", env::kNodeFeatureDim, d, true, rng);
  if (cfg_.use_ppe) nn::init_linear(params_, "enc.ppe", cfg_.ppe_dim(), d, true, rng);
  for (int l = 0; l < cfg_.n_layers; ++l) {
    nn::init_mha(params_, layer(l, "mha"), d, rng);
    nn::init_batch_norm(params_, layer(l, "bn1"), d);
    nn::init_linear(params_, layer(l, "ff1"), d, cfg_.ff, true, rng);
    nn::init_linear(params_, layer(l, "ff2"), cfg_.ff, d, true, rng);
    nn::init_batch_norm(params_, layer(l, "bn2"), d);
  }
  if (cfg_.use_pcn) {
    nn::init_linear(params_, "dec.pcn.1", d, d, true, rng);
    nn::init_linear(params_, "dec.pcn.2", d, d, true, rng);
  }
  if (cfg_.use_rcn) {
    nn::init_linear(params_, "dec.rcn.1", d, d, true, rng);
    nn::init_linear(params_, "dec.rcn.2", d, d, true, rng);
    if (cfg_.start_token == StartToken::Learned) {
      const double a = 1.0 / std::sqrt(static_cast<double>(d));
      Matrix start(1, d);
      for (Index i = 0; i < d; ++i) start(0, i) = (2.0 * rng.uniform01() - 1.0) * a;
      params_.add("dec.start", std::move(start));
    }
  }
  nn::init_linear(params_, "dec.query", d, d, true, rng);
  nn::init_linear(params_, "dec.glimpse_k", d, d, false, rng);
  nn::init_linear(params_, "dec.glimpse_v", d, d, false, rng);
  nn::init_linear(params_, "dec.glimpse_out", d, d, false, rng);
  nn::init_linear(params_, "dec.logit_k", d, d, false, rng);
}

Var DevFormer::encode_batch(Binder& p, const std::vector<const env::Problem*>& problems, BnMode mode) const {
  require(!problems.empty(), "encode_batch: empty batch");
  const int rows = problems[0]->n_rows;
  const int cols = problems[0]->n_cols;
  const Index n = rows * cols;
  const Index b = static_cast<Index>(problems.size());
  Matrix feats(b * n, env::kNodeFeatureDim);
  Matrix ppe(b * n, cfg_.ppe_dim());
  for (Index i = 0; i < b; ++i) {
    const env::Problem& pr = *problems[static_cast<std::size_t>(i)];
    require(pr.n_rows == rows && pr.n_cols == cols, "encode_batch: problems must share board dimensions");
    feats.middleRows(i * n, n) = env::encode_features(pr);
    if (cfg_.use_ppe) ppe.middleRows(i * n, n) = ppe_features(pr, cfg_.ppe_mode);
  }

  Graph& g = p.graph();
  const nn::BnSettings bn{cfg_.bn_eps, cfg_.bn_momentum};
  Var h = nn::apply_linear(p, "enc.node", g.constant(std::move(feats)));
  if (cfg_.use_ppe) h = nn::add(g, h, nn::apply_linear(p, "enc.ppe", g.constant(std::move(ppe))));
  for (int l = 0; l < cfg_.n_layers; ++l) {
    Var att = nn::apply_mha(p, layer(l, "mha"), h, h, cfg_.n_heads, n, n);
    h = nn::apply_batch_norm(p, layer(l, "bn1"), cfg_.residual ? nn::add(g, h, att) : att, mode, bn);
    Var ff = nn::apply_linear(p, layer(l, "ff2"), nn::relu(g, nn::apply_linear(p, layer(l, "ff1"), h)));
    h = nn::apply_batch_norm(p, layer(l, "bn2"), cfg_.residual ? nn::add(g, h, ff) : ff, mode, bn);
  }
  return h;
}

Var DevFormer::query_from(Binder& p, Var h_probe_rows, Var h_prev_rows, Var h_mean_rows) const {
  Graph& g = p.graph();
  std::optional<Var> ctx;
  if (cfg_.use_pcn) ctx = mlp2(p, "dec.pcn", h_probe_rows);
  if (cfg_.use_rcn) {
    Var r = mlp2(p, "dec.rcn", h_prev_rows);
    ctx = ctx ? nn::add(g, *ctx, r) : r;
  }
  return nn::apply_linear(p, "dec.query", ctx ? *ctx : h_mean_rows);
}

Var DevFormer::decoder_logits(Binder& p, Var query, Var gk, Var gv, Var lk, Index q_group, Index n_ports,
                              const Mask& mask) const {
  Graph& g = p.graph();
  Var glimpse = nn::attention(g, query, gk, gv, cfg_.n_heads, q_group, n_ports, &mask);
  glimpse = nn::apply_linear(p, "dec.glimpse_out", glimpse);
  const double s = 1.0 / std::sqrt(static_cast<double>(cfg_.d));
  Var scores = nn::pointer_scores(g, glimpse, lk, q_group, n_ports, s);
  Var logits = nn::scale(g, nn::tanh(g, scores), cfg_.tanh_clip);
  return nn::masked_log_softmax(g, logits, mask);
}

Var DevFormer::sequence_log_probs(Binder& p, const std::vector<const env::Problem*>& problems,
                                  const std::vector<const env::Placement*>& placements, BnMode mode) const {
  require(problems.size() == placements.size(), "sequence_log_probs: problem/placement count mismatch");
  require(!problems.empty(), "sequence_log_probs: empty batch");
  const Index b = static_cast<Index>(problems.size());
  const Index k = placements[0]->size();
  require(k >= 1, "sequence_log_probs: empty placements");
  const Index n = problems[0]->n_ports();

  std::vector<Index> probe_rows, prev_rows, labels;
  Mask mask(b * k, n);
  for (Index i = 0; i < b; ++i) {
    const env::Problem& pr = *problems[static_cast<std::size_t>(i)];
    const env::Placement& pl = *placements[static_cast<std::size_t>(i)];
    require(pl.size() == k, "sequence_log_probs: placements must share K");
    env::validate_placement(pr, pl);
    probe_rows.push_back(i * n + pr.probe);
    auto feasible = env::feasibility_mask(pr, {});
    for (Index t = 0; t < k; ++t) {
      if (t > 0) feasible[static_cast<std::size_t>(pl.actions[static_cast<std::size_t>(t - 1)])] = 0;
      for (Index c = 0; c < n; ++c) mask.set(i * k + t, c, feasible[static_cast<std::size_t>(c)] != 0);
      prev_rows.push_back(t == 0 ? b * n : i * n + pl.actions[static_cast<std::size_t>(t - 1)]);
      labels.push_back(pl.actions[static_cast<std::size_t>(t)]);
    }
  }

  Graph& g = p.graph();
  Var h = encode_batch(p, problems, mode);
  Var start = cfg_.use_rcn && cfg_.start_token == StartToken::Learned ? p("dec.start")
                                                                       : g.constant(Matrix::Zero(1, cfg_.d));
  Var h_ext = nn::concat_rows(g, {h, start});
  Var probe = nn::repeat_rows(g, nn::gather_rows(g, h, probe_rows), k);
  Var prev = nn::gather_rows(g, h_ext, prev_rows);
  Var mean = nn::repeat_rows(g, nn::group_mean_rows(g, h, n), k);
  Var query = query_from(p, probe, prev, mean);

  Var gk = nn::apply_linear(p, "dec.glimpse_k", h);
  Var gv = nn::apply_linear(p, "dec.glimpse_v", h);
  Var lk = nn::apply_linear(p, "dec.logit_k", h);
  Var logp = decoder_logits(p, query, gk, gv, lk, k, n, mask);
  return nn::group_sum_rows(g, nn::pick_cols(g, logp, labels), k);
}

Encoding DevFormer::encode(const env::Problem& problem) const {
  Graph g;
  Binder p = Binder::frozen(g, params_);
  Var h = encode_batch(p, {&problem}, BnMode::Eval);
  Encoding e;
  e.h = g.value(h);
  e.h_probe = e.h.row(problem.probe);
  e.glimpse_k = g.value(nn::apply_linear(p, "dec.glimpse_k", h));
  e.glimpse_v = g.value(nn::apply_linear(p, "dec.glimpse_v", h));
  e.logit_k = g.value(nn::apply_linear(p, "dec.logit_k", h));
  e.h_mean = g.value(nn::group_mean_rows(g, h, e.h.rows()));
  return e;
}

Matrix DevFormer::context_query(const Encoding& enc, std::optional<int> prev) const {
  Graph g;
  Binder p = Binder::frozen(g, params_);
  Var prev_row;
  if (prev) {
    require(*prev >= 0 && *prev < enc.h.rows(), "context_query: previous action out of range");
    prev_row = g.constant(enc.h.row(*prev));
  } else {
    prev_row = cfg_.use_rcn && cfg_.start_token == StartToken::Learned ? p("dec.start")
                                                                       : g.constant(Matrix::Zero(1, cfg_.d));
  }
  return g.value(query_from(p, g.constant(enc.h_probe), prev_row, g.constant(enc.h_mean)));
}

std::vector<double> DevFormer::decode_step(const Encoding& enc, const Matrix& query,
                                           const std::vector<std::uint8_t>& mask) const {
  const Index n = enc.h.rows();
  require(static_cast<Index>(mask.size()) == n, "decode_step: mask size does not match the board");
  require(query.rows() == 1 && query.cols() == cfg_.d, "decode_step: query must be 1 x d");
  Mask m(1, n);
  m.allowed = mask;
  Graph g;
  Binder p = Binder::frozen(g, params_);
  Var logp = decoder_logits(p, g.constant(query), g.constant(enc.glimpse_k), g.constant(enc.glimpse_v),
                            g.constant(enc.logit_k), 1, n, m);
  const Matrix& v = g.value(logp);
  return std::vector<double>(v.data(), v.data() + v.size());
}

env::Episode DevFormer::rollout(const env::Problem& problem, int k, env::DecodeMode mode, std::uint64_t seed) const {
  DevFormerPolicy policy(*this);
  Rng rng(seed);
  return env::run_episode(policy, problem, k, mode, &rng);
}

double DevFormer::log_prob(const env::Problem& problem, const env::Placement& placement) const {
  DevFormerPolicy policy(*this);
  return env::sequence_log_prob(policy, problem, placement);
}

std::string DevFormer::config_text(const nlohmann::json& extra) const {
  nlohmann::json j{{"model", cfg_.to_json()}, {"extra", extra}};
  return j.dump();
}

std::uint64_t DevFormer::config_hash(const nlohmann::json& extra) const { return fnv1a64(config_text(extra)); }

void DevFormer::save(const std::filesystem::path& path, const nlohmann::json& extra) const {
  nn::save_container(path.string(), config_text(extra), params_);
}

DevFormer::Loaded DevFormer::load(const std::filesystem::path& path, std::optional<std::uint64_t> expected_hash) {
  nn::Container c = nn::load_container(path.string());
  if (expected_hash && *expected_hash != c.config_hash)
    throw ContractViolation("checkpoint " + path.string() + ": config hash mismatch");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(c.config);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("checkpoint " + path.string() + ": malformed config: " + e.what());
  }
  if (!j.contains("model")) throw IoError("checkpoint " + path.string() + ": config has no model section");
  ModelConfig cfg = ModelConfig::from_json(j.at("model"));
  return Loaded{DevFormer(cfg, std::move(c.store)), j.value("extra", nlohmann::json::object()), c.config_hash};
}

std::vector<double> DevFormerPolicy::next_log_probs(const env::State& state) {
  if (!cached_for_ || !(*cached_for_ == state.problem)) {
    enc_ = model_.encode(state.problem);
    cached_for_ = state.problem;
  }
  std::optional<int> prev;
  if (!state.chosen.empty()) prev = state.chosen.back();
  const Matrix q = model_.context_query(enc_, prev);
  return model_.decode_step(enc_, q, env::feasibility_mask(state.problem, state.chosen));
}

}  // namespace dpp::model
