#pragma once

// A trained model plus the per-graph preparation shared by few-shot and
// zero-shot scoring: align -> normalize adjacency -> propagate -> encode.

#include <nlohmann/json.hpp>

#include "gad/align.hpp"
#include "gad/encoder.hpp"
#include "gad/scoring.hpp"

namespace gad {

struct ModelConfig {
  AlignOptions align;
  EncoderConfig encoder;
};

struct Model {
  ParamVector params;
  ModelConfig config;
};

/// Everything about a graph that does not depend on the parameters.
struct PreparedGraph {
  Graph graph;  // labels stripped
  AlignedFeatures aligned;
  NormalizedAdjacency adjacency;
  PropagatedFeatures propagated;
};

inline PreparedGraph prepare(const Graph& g, const ModelConfig& config) {
  PreparedGraph p;
  p.graph = g.without_labels();
  p.aligned = align(p.graph, config.align);
  p.adjacency = normalize_adjacency(p.graph);
  p.propagated = propagate_hops(p.adjacency, p.aligned.matrix, config.encoder.hops);
  return p;
}

inline Embeddings embed(const PreparedGraph& p, const Model& model) {
  return encode(p.propagated, model.params, model.config.encoder);
}

inline void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = {{"align", {{"unified_dim", c.align.unified_dim}, {"mode", to_string(c.align.mode)}, {"seed", c.align.seed}}},
       {"encoder", {{"hops", c.encoder.hops}, {"hidden", c.encoder.hidden}, {"mlp_depth", c.encoder.mlp_depth}}}};
}

inline void from_json(const nlohmann::json& j, ModelConfig& c) {
  const auto& a = j.at("align");
  c.align.unified_dim = a.at("unified_dim").get<std::size_t>();
  c.align.mode = align_mode_from_string(a.at("mode").get<std::string>());
  c.align.seed = a.at("seed").get<std::uint64_t>();
  const auto& e = j.at("encoder");
  c.encoder.hops = e.at("hops").get<std::size_t>();
  c.encoder.hidden = e.at("hidden").get<std::size_t>();
  c.encoder.mlp_depth = e.at("mlp_depth").get<std::size_t>();
}

}  // namespace gad
