#pragma once

// Ego-neighbor residual encoder. Features are propagated L times with the
// normalized adjacency (no parameters involved), every hop goes through the
// same MLP, and the representation is the concatenation of Z[l] - Z[0] for
// l = 1..L. Z[0] itself is not part of H.

#include <span>
#include <vector>

#include "gad/graph.hpp"
#include "gad/model.hpp"

namespace gad {

/// X[0..L]; X[l] = A_norm * X[l-1]. Constant with respect to the parameters.
struct PropagatedFeatures {
  std::vector<Matrix> hops;

  std::size_t depth() const noexcept { return hops.empty() ? 0 : hops.size() - 1; }
  std::size_t node_count() const noexcept { return hops.empty() ? 0 : hops.front().rows(); }
};

inline PropagatedFeatures propagate_hops(const NormalizedAdjacency& adj, const Matrix& x0, std::size_t depth) {
  PropagatedFeatures out;
  out.hops.reserve(depth + 1);
  out.hops.push_back(x0);
  for (std::size_t l = 1; l <= depth; ++l) out.hops.push_back(propagate(adj, out.hops.back()));
  return out;
}

struct Embeddings {
  Matrix h;  // n x (hops * hidden); column block l holds R[l+1]
  EncoderConfig config;
};

/// H built with an arbitrary row-wise transform in place of the MLP.
template <class Transform>
Matrix residual_embeddings(const PropagatedFeatures& x, Transform&& transform) {
  if (x.depth() < 1) throw Error(ErrorCode::Config, "encoder needs at least one propagation hop");
  const Matrix ego = transform(x.hops[0]);
  std::vector<Matrix> residuals;
  residuals.reserve(x.depth());
  for (std::size_t l = 1; l <= x.depth(); ++l) residuals.push_back(subtract(transform(x.hops[l]), ego));
  std::vector<const Matrix*> parts;
  for (const auto& r : residuals) parts.push_back(&r);
  return concat_cols(parts);
}

inline Embeddings encode(const PropagatedFeatures& x, const ParamVector& params, const EncoderConfig& cfg) {
  if (x.depth() != cfg.hops) throw Error(ErrorCode::DimensionMismatch, "propagated depth != encoder hops");
  require_architecture(params, x.hops.front().cols(), cfg);
  Embeddings out;
  out.config = cfg;
  out.h = residual_embeddings(x, [&](const Matrix& m) { return mlp_forward(params, cfg, m); });
  require_finite(out.h, "encoder output");
  return out;
}

inline Embeddings encode(const NormalizedAdjacency& adj, const Matrix& x0, const ParamVector& params,
                         const EncoderConfig& cfg) {
  return encode(propagate_hops(adj, x0, cfg.hops), params, cfg);
}

/// Taped encoder restricted to `rows`; the MLP is row-wise, so only the rows
/// that take part in an episode need to be transformed.
inline Var encode_rows(Tape& tape, const ModelVars& vars, const PropagatedFeatures& x, std::span<const NodeId> rows) {
  if (x.depth() != vars.config.hops) throw Error(ErrorCode::DimensionMismatch, "propagated depth != encoder hops");
  const Var ego = mlp_forward(tape, vars, tape.constant(gather_rows(x.hops[0], rows)));
  std::vector<Var> residuals;
  for (std::size_t l = 1; l <= x.depth(); ++l) {
    const Var z = mlp_forward(tape, vars, tape.constant(gather_rows(x.hops[l], rows)));
    residuals.push_back(tape.subtract(z, ego));
  }
  return tape.concat_cols(residuals);
}

}  // namespace gad
