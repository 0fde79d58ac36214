#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gad/error.hpp"
#include "gad/matrix.hpp"

namespace gad {

using NodeId = std::size_t;
using Edge = std::pair<NodeId, NodeId>;

/// Undirected attributed graph. Immutable after construction: adjacency is a
/// symmetric CSR without self-loops, each undirected edge stored in both rows
/// and counted once in edge_count().
class Graph {
 public:
  Graph() = default;

  /// Builds from an arbitrary edge list. Edges are symmetrized, duplicates
  /// merged and self-loops dropped.
  static Graph from_edges(std::size_t n, std::span<const Edge> edges, Matrix features,
                          std::optional<std::vector<std::uint8_t>> labels = std::nullopt,
                          std::string name = {}) {
    if (features.rows() != n) {
      throw Error(ErrorCode::DimensionMismatch, "feature rows " + std::to_string(features.rows()) +
                                                    " != node count " + std::to_string(n));
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (double v : features.row(i)) {
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteFeature, "row " + std::to_string(i), i);
      }
    }
    if (labels) {
      if (labels->size() != n) throw Error(ErrorCode::DimensionMismatch, "label vector length");
      for (auto& y : *labels) {
        if (y > 1) throw Error(ErrorCode::MalformedHeader, "label values must be 0 or 1");
      }
    }

    std::vector<std::vector<NodeId>> rows(n);
    for (const auto& [u, v] : edges) {
      if (u >= n) throw Error(ErrorCode::IndexOutOfRange, "edge endpoint " + std::to_string(u), u);
      if (v >= n) throw Error(ErrorCode::IndexOutOfRange, "edge endpoint " + std::to_string(v), v);
      if (u == v) continue;
      rows[u].push_back(v);
      rows[v].push_back(u);
    }

    Graph g;
    g.offsets_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& r = rows[i];
      std::sort(r.begin(), r.end());
      r.erase(std::unique(r.begin(), r.end()), r.end());
      g.offsets_[i + 1] = g.offsets_[i] + r.size();
    }
    g.indices_.reserve(g.offsets_[n]);
    for (auto& r : rows) g.indices_.insert(g.indices_.end(), r.begin(), r.end());
    g.features_ = std::move(features);
    g.labels_ = std::move(labels);
    g.name_ = std::move(name);
    return g;
  }

  std::size_t node_count() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t edge_count() const noexcept { return indices_.size() / 2; }
  std::size_t feature_dim() const noexcept { return features_.cols(); }

  std::span<const std::size_t> row_offsets() const noexcept { return offsets_; }
  std::span<const NodeId> column_indices() const noexcept { return indices_; }
  std::span<const NodeId> neighbors(NodeId v) const {
    return {indices_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }
  std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }

  /// Each undirected edge once, as (u, v) with u < v, in CSR order.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count());
    for (NodeId u = 0; u < node_count(); ++u)
      for (NodeId v : neighbors(u))
        if (u < v) out.emplace_back(u, v);
    return out;
  }

  const Matrix& features() const noexcept { return features_; }
  bool has_labels() const noexcept { return labels_.has_value(); }
  const std::vector<std::uint8_t>& labels() const {
    if (!labels_) throw Error(ErrorCode::Contract, "graph '" + name_ + "' has no labels");
    return *labels_;
  }
  const std::string& name() const noexcept { return name_; }

  std::size_t anomaly_count() const {
    if (!labels_) return 0;
    return static_cast<std::size_t>(std::count(labels_->begin(), labels_->end(), std::uint8_t{1}));
  }

  /// Copy with the label vector removed.
  Graph without_labels() const {
    Graph g = *this;
    g.labels_.reset();
    return g;
  }

  Graph with_labels(std::vector<std::uint8_t> labels) const {
    return from_edges(node_count(), edges(), features_, std::move(labels), name_);
  }

  Graph with_features(Matrix features) const {
    return from_edges(node_count(), edges(), std::move(features), labels_, name_);
  }

  Graph with_name(std::string name) const {
    Graph g = *this;
    g.name_ = std::move(name);
    return g;
  }

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> indices_;
  Matrix features_;
  std::optional<std::vector<std::uint8_t>> labels_;
  std::string name_;
};

/// Both classes present, as needed for any graph used in training or evaluation.
inline void require_both_classes(const Graph& g) {
  const std::size_t anomalies = g.anomaly_count();
  if (!g.has_labels() || anomalies == 0 || anomalies == g.node_count()) {
    throw Error(ErrorCode::SingleClass, "graph '" + g.name() + "' needs both normal and anomalous labels");
  }
}

enum class NormalizationScheme { SymSelfLoop };

/// D^-1/2 (A + I) D^-1/2 with D the degree matrix of A + I.
/// Entry (i,j) is also kept as row_scale[i] * ratios[p] = (1/d_i) * sqrt(d_i / d_j), d from A + I;
/// propagate() uses that split so equal-degree rows reproduce a constant exactly.
struct NormalizedAdjacency {
  std::vector<std::size_t> offsets;
  std::vector<NodeId> indices;
  std::vector<double> values;
  std::vector<double> ratios;
  std::vector<double> row_scale;
  NormalizationScheme scheme = NormalizationScheme::SymSelfLoop;

  std::size_t node_count() const noexcept { return offsets.empty() ? 0 : offsets.size() - 1; }

  Matrix to_dense() const {
    const std::size_t n = node_count();
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t p = offsets[i]; p < offsets[i + 1]; ++p) out(i, indices[p]) = values[p];
    return out;
  }
};

inline NormalizedAdjacency normalize_adjacency(const Graph& g) {
  const std::size_t n = g.node_count();
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(g.degree(i) + 1));

  NormalizedAdjacency adj;
  adj.offsets.assign(n + 1, 0);
  adj.row_scale.resize(n);
  const std::size_t nnz = g.column_indices().size() + n;
  adj.indices.reserve(nnz);
  adj.values.reserve(nnz);
  adj.ratios.reserve(nnz);
  auto push = [&](std::size_t i, NodeId j) {
    adj.indices.push_back(j);
    adj.values.push_back(inv_sqrt[i] * inv_sqrt[j]);
    const auto di = g.degree(i), dj = g.degree(j);
    adj.ratios.push_back(di == dj ? 1.0 : std::sqrt(static_cast<double>(di + 1) / static_cast<double>(dj + 1)));
  };
  for (std::size_t i = 0; i < n; ++i) {
    adj.row_scale[i] = 1.0 / static_cast<double>(g.degree(i) + 1);
    bool diagonal_done = false;
    for (NodeId j : g.neighbors(i)) {
      if (!diagonal_done && j > i) {
        push(i, static_cast<NodeId>(i));
        diagonal_done = true;
      }
      push(i, j);
    }
    if (!diagonal_done) push(i, static_cast<NodeId>(i));
    adj.offsets[i + 1] = adj.indices.size();
  }
  return adj;
}

/// adj * x, sparse times dense. No learnable state.
/// Evaluated as x_i + s_i * sum_j (r_ij x_j - x_i), which equals (adj x)_i but
/// leaves a constant signal on a regular graph bit-for-bit unchanged.
inline Matrix propagate(const NormalizedAdjacency& adj, const Matrix& x) {
  const std::size_t n = adj.node_count();
  if (x.rows() != n) throw Error(ErrorCode::DimensionMismatch, "propagate: feature rows != node count");
  Matrix out(n, x.cols());
  const std::size_t avg_nnz = n ? adj.values.size() / n + 1 : 1;
  parallel_rows(n, avg_nnz * x.cols(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto o = out.row(i);
      const auto self = x.row(i);
      for (std::size_t p = adj.offsets[i]; p < adj.offsets[i + 1]; ++p) {
        const double r = adj.ratios[p];
        const auto src = x.row(adj.indices[p]);
        for (std::size_t c = 0; c < o.size(); ++c) o[c] += r * src[c] - self[c];
      }
      const double s = adj.row_scale[i];
      for (std::size_t c = 0; c < o.size(); ++c) o[c] = self[c] + s * o[c];
    }
  });
  return out;
}

}  // namespace gad
