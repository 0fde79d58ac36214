#pragma once

// Learnable state: one MLP shared by every propagation hop, and the query/key
// projections of the cross-attention block. Block names:
//   mlp.layer{i}.w  (in x out)    mlp.layer{i}.b  (1 x out)
//   attn.wq, attn.wk  (d_e x d_e), d_e = hops * hidden

#include <cmath>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "gad/autodiff.hpp"
#include "gad/params.hpp"
#include "gad/rng.hpp"

namespace gad {

struct EncoderConfig {
  std::size_t hops = 2;       // L
  std::size_t hidden = 64;    // h, MLP width and output width
  std::size_t mlp_depth = 2;  // number of linear layers, ReLU between them

  std::size_t embedding_dim() const noexcept { return hops * hidden; }

  void validate() const {
    require(hops >= 1, ErrorCode::Config, "encoder hops must be >= 1");
    require(hidden >= 1, ErrorCode::Config, "encoder hidden must be >= 1");
    require(mlp_depth >= 1, ErrorCode::Config, "encoder mlp_depth must be >= 1");
  }

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

inline std::string mlp_weight_name(std::size_t layer) { return "mlp.layer" + std::to_string(layer) + ".w"; }
inline std::string mlp_bias_name(std::size_t layer) { return "mlp.layer" + std::to_string(layer) + ".b"; }

/// Zero-valued parameter vector with the architecture's block layout.
inline ParamVector model_layout(std::size_t input_dim, const EncoderConfig& cfg) {
  cfg.validate();
  ParamVector p;
  std::size_t in = input_dim;
  for (std::size_t layer = 0; layer < cfg.mlp_depth; ++layer) {
    p.add_block(mlp_weight_name(layer), in, cfg.hidden);
    p.add_block(mlp_bias_name(layer), 1, cfg.hidden);
    in = cfg.hidden;
  }
  const std::size_t de = cfg.embedding_dim();
  p.add_block("attn.wq", de, de);
  p.add_block("attn.wk", de, de);
  return p;
}

/// Uniform fan-in initialisation: bound sqrt(6/fan_in) for layers feeding a
/// ReLU, sqrt(3/fan_in) for linear outputs and attention projections. Biases 0.
inline ParamVector init_params(std::size_t input_dim, const EncoderConfig& cfg, std::uint64_t seed) {
  ParamVector p = model_layout(input_dim, cfg);
  Rng rng(seed);
  for (const ParamBlock& b : p.blocks()) {
    if (b.rows == 1 && b.name.ends_with(".b")) continue;
    const bool feeds_relu = b.name.starts_with("mlp.") && b.name != mlp_weight_name(cfg.mlp_depth - 1);
    const double bound = std::sqrt((feeds_relu ? 6.0 : 3.0) / static_cast<double>(b.rows));
    for (double& v : p.slice(b)) v = rng.uniform(-bound, bound);
  }
  return p;
}

inline std::size_t model_input_dim(const ParamVector& p) { return p.block(mlp_weight_name(0)).rows; }

/// Checks that a parameter vector matches the encoder configuration.
inline void require_architecture(const ParamVector& p, std::size_t input_dim, const EncoderConfig& cfg) {
  if (!p.same_layout(model_layout(input_dim, cfg))) {
    throw Error(ErrorCode::DimensionMismatch, "parameters do not match encoder configuration");
  }
}

/// Plain forward pass of the shared MLP.
inline Matrix mlp_forward(const ParamVector& p, const EncoderConfig& cfg, const Matrix& x) {
  Matrix h = x;
  for (std::size_t layer = 0; layer < cfg.mlp_depth; ++layer) {
    h = add_bias(matmul(h, p.unpack(mlp_weight_name(layer))), p.unpack(mlp_bias_name(layer)));
    if (layer + 1 < cfg.mlp_depth) h = relu(h);
  }
  return h;
}

/// Parameter leaves bound on a tape, created once per tape so every use
/// accumulates into the same gradient.
struct ModelVars {
  std::vector<Var> weights;
  std::vector<Var> biases;
  Var wq;
  Var wk;
  EncoderConfig config;
};

inline ModelVars bind_model(Tape& tape, const ParamVector& p, const EncoderConfig& cfg) {
  ModelVars vars;
  vars.config = cfg;
  for (std::size_t layer = 0; layer < cfg.mlp_depth; ++layer) {
    vars.weights.push_back(tape.param(p, mlp_weight_name(layer)));
    vars.biases.push_back(tape.param(p, mlp_bias_name(layer)));
  }
  vars.wq = tape.param(p, "attn.wq");
  vars.wk = tape.param(p, "attn.wk");
  return vars;
}

inline Var mlp_forward(Tape& tape, const ModelVars& vars, Var x) {
  Var h = x;
  for (std::size_t layer = 0; layer < vars.weights.size(); ++layer) {
    h = tape.add_bias(tape.matmul(h, vars.weights[layer]), vars.biases[layer]);
    if (layer + 1 < vars.weights.size()) h = tape.relu(h);
  }
  return h;
}

}  // namespace gad
