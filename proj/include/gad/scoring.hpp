#pragma once

// In-context scoring. Query embeddings are reconstructed as attention-weighted
// combinations of the raw context embeddings (no value projection), and the
// anomaly score of a query is its L2 reconstruction error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "gad/encoder.hpp"

namespace gad {

struct ContextSplit {
  std::vector<NodeId> context;
  std::vector<NodeId> query;

  /// context as given; query = every other node, ascending.
  static ContextSplit complement(std::size_t n, std::span<const NodeId> context) {
    ContextSplit split;
    split.context.assign(context.begin(), context.end());
    std::vector<char> used(n, 0);
    for (NodeId v : context) {
      if (v >= n) throw Error(ErrorCode::IndexOutOfRange, "context node " + std::to_string(v), v);
      if (used[v]) throw Error(ErrorCode::Contract, "duplicate context node " + std::to_string(v), v);
      used[v] = 1;
    }
    for (NodeId v = 0; v < n; ++v)
      if (!used[v]) split.query.push_back(v);
    return split;
  }

  void validate(std::size_t n) const {
    require(!context.empty(), ErrorCode::Contract, "context must hold at least one node");
    std::vector<char> seen(n, 0);
    for (NodeId v : context) {
      if (v >= n) throw Error(ErrorCode::IndexOutOfRange, "context node out of range", v);
      if (seen[v]) throw Error(ErrorCode::Contract, "duplicate context node", v);
      seen[v] = 1;
    }
    for (NodeId v : query) {
      if (v >= n) throw Error(ErrorCode::IndexOutOfRange, "query node out of range", v);
      if (seen[v]) throw Error(ErrorCode::Contract, "query overlaps context or repeats", v);
      seen[v] = 1;
    }
  }
};

struct AttentionResult {
  Matrix weights;        // n_q x n_k, rows on the simplex
  Matrix reconstructed;  // n_q x d_e
};

inline void require_attention_shapes(const Matrix& hq, const Matrix& hk, const ParamVector& params) {
  if (hq.cols() != hk.cols()) throw Error(ErrorCode::DimensionMismatch, "query/context embedding widths differ");
  if (hk.rows() == 0) throw Error(ErrorCode::Contract, "cross attention needs at least one context row");
  const ParamBlock& wq = params.block("attn.wq");
  const ParamBlock& wk = params.block("attn.wk");
  if (wq.rows != hq.cols() || wq.cols != hq.cols() || wk.rows != hq.cols() || wk.cols != hq.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "attention projections must be d_e x d_e");
  }
}

inline AttentionResult cross_attend(const Matrix& hq, const Matrix& hk, const ParamVector& params) {
  require_attention_shapes(hq, hk, params);
  const Matrix q = matmul(hq, params.unpack("attn.wq"));
  const Matrix k = matmul(hk, params.unpack("attn.wk"));
  const double temperature = 1.0 / std::sqrt(static_cast<double>(hq.cols()));
  AttentionResult out;
  out.weights = softmax_rows(scale(matmul_bt(q, k), temperature));
  out.reconstructed = matmul(out.weights, hk);
  require_finite(out.reconstructed, "cross attention");
  return out;
}

/// Taped cross attention; returns the reconstructed query rows.
inline Var cross_attend(Tape& tape, const ModelVars& vars, Var hq, Var hk) {
  const std::size_t width = tape.value(hq).cols();
  const Var q = tape.matmul(hq, vars.wq);
  const Var k = tape.matmul(hk, vars.wk);
  const Var weights = tape.softmax_rows(tape.scale(tape.matmul_bt(q, k), 1.0 / std::sqrt(static_cast<double>(width))));
  return tape.matmul(weights, hk);
}

/// Row-wise L2 distance between embeddings and their reconstructions.
inline std::vector<double> reconstruction_scores(const Matrix& hq, const Matrix& reconstructed) {
  require_same_shape(hq, reconstructed, "reconstruction_scores");
  std::vector<double> out(hq.rows());
  for (std::size_t i = 0; i < hq.rows(); ++i) out[i] = std::sqrt(squared_distance(hq.row(i), reconstructed.row(i)));
  return out;
}

/// Mean margin cosine loss without a tape (same arithmetic as the taped path).
inline double margin_cosine_loss(const Matrix& hq, const Matrix& reconstructed, std::span<const std::uint8_t> labels,
                                 double margin) {
  Tape tape;
  const Var a = tape.constant(hq);
  const Var b = tape.constant(reconstructed);
  return tape.value(tape.mean(tape.margin_hinge(tape.row_cosine(a, b), labels, margin)))(0, 0);
}

/// Scores keyed by node id. `round_history` is filled by the zero-shot path
/// with one full-length (imputed) score vector per round.
struct ScoreVector {
  std::vector<NodeId> nodes;
  std::vector<double> values;
  std::vector<std::vector<double>> round_history;

  std::size_t size() const noexcept { return nodes.size(); }
};

/// Few-shot scoring: `context` are labelled normals, every other node is a query.
inline ScoreVector score_few_shot(const Embeddings& emb, const ParamVector& params, std::span<const NodeId> context) {
  const ContextSplit split = ContextSplit::complement(emb.h.rows(), context);
  split.validate(emb.h.rows());
  const AttentionResult att = cross_attend(gather_rows(emb.h, split.query), gather_rows(emb.h, split.context), params);
  ScoreVector out;
  out.nodes = split.query;
  out.values = reconstruction_scores(gather_rows(emb.h, split.query), att.reconstructed);
  return out;
}

}  // namespace gad
