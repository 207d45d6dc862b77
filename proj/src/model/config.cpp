// SPDX-License-Identifier: Apache-2.0

#include "dpp/model/config.hpp"

#include <string>

#include "dpp/common/errors.hpp"

namespace dpp::model {

using nlohmann::json;

void ModelConfig::validate() const {
  require(n_layers >= 0, "ModelConfig: n_layers must be >= 0");
  require(d >= 1 && ff >= 1, "ModelConfig: widths must be positive");
  require(n_heads >= 1 && d % n_heads == 0,
          "ModelConfig: n_heads " + std::to_string(n_heads) + " does not divide d " + std::to_string(d));
  require(tanh_clip > 0.0, "ModelConfig: tanh_clip must be positive");
  require(bn_eps > 0.0 && bn_momentum > 0.0 && bn_momentum <= 1.0, "ModelConfig: bad batch-norm settings");
}

json ModelConfig::to_json() const {
  return json{{"n_layers", n_layers},
              {"d", d},
              {"ff", ff},
              {"n_heads", n_heads},
              {"ppe_mode", ppe_mode == PpeMode::Norm ? "norm" : "delta_and_norm"},
              {"start_token", start_token == StartToken::Learned ? "learned" : "zero"},
              {"use_ppe", use_ppe},
              {"use_pcn", use_pcn},
              {"use_rcn", use_rcn},
              {"residual", residual},
              {"tanh_clip", tanh_clip},
              {"bn_eps", bn_eps},
              {"bn_momentum", bn_momentum}};
}

ModelConfig ModelConfig::from_json(const json& j) {
  ModelConfig c;
  try {
    c.n_layers = j.at("n_layers").get<int>();
    c.d = j.at("d").get<int>();
    c.ff = j.at("ff").get<int>();
    c.n_heads = j.at("n_heads").get<int>();
    const auto ppe = j.at("ppe_mode").get<std::string>();
    require(ppe == "norm" || ppe == "delta_and_norm", "ModelConfig: unknown ppe_mode " + ppe);
    c.ppe_mode = ppe == "norm" ? PpeMode::Norm : PpeMode::DeltaAndNorm;
    const auto start = j.at("start_token").get<std::string>();
    require(start == "learned" || start == "zero", "ModelConfig: unknown start_token " + start);
    c.start_token = start == "learned" ? StartToken::Learned : StartToken::Zero;
    c.use_ppe = j.at("use_ppe").get<bool>();
    c.use_pcn = j.at("use_pcn").get<bool>();
    c.use_rcn = j.at("use_rcn").get<bool>();
    c.residual = j.at("residual").get<bool>();
    c.tanh_clip = j.at("tanh_clip").get<double>();
    c.bn_eps = j.at("bn_eps").get<double>();
    c.bn_momentum = j.at("bn_momentum").get<double>();
  } catch (const json::exception& e) {
    throw ContractViolation(std::string("ModelConfig: ") + e.what());
  }
  c.validate();
  return c;
}

ModelConfig ModelConfig::ablated() const {
  ModelConfig c = *this;
  c.use_ppe = false;
  c.use_pcn = false;
  c.use_rcn = false;
  return c;
}

ModelConfig ModelConfig::toy() {
  ModelConfig c;
  c.n_layers = 2;
  c.d = 32;
  c.ff = 64;
  c.n_heads = 4;
  return c;
}

ModelConfig ModelConfig::gradcheck_toy() {
  ModelConfig c;
  c.n_layers = 1;
  c.d = 16;
  c.ff = 32;
  c.n_heads = 2;
  return c;
}

}  // namespace dpp::model
