#pragma once

// Feature alignment: every dataset is min-max scaled, projected to a common
// width with its own PCA basis, and the projected columns are reordered by
// feature smoothness so that column 0 is always the least smooth (most
// high-frequency) direction.

#include <Eigen/Dense>
#include <algorithm>
#include <limits>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "gad/graph.hpp"
#include "gad/rng.hpp"

namespace gad {

struct ProjectionModel {
  Matrix basis;               // source_dim x min(source_dim, unified_dim), orthonormal columns
  std::vector<double> mean;   // source_dim
  std::vector<double> eigenvalues;
  std::size_t source_dim = 0;
  std::size_t unified_dim = 0;
  bool degenerate = false;    // zero total variance; basis is an arbitrary orthonormal set

  std::size_t component_count() const noexcept { return basis.cols(); }
};

struct SmoothnessVector {
  std::vector<double> values;      // s_k per projected column
  std::vector<std::size_t> order;  // ascending s_k, ties by index
};

enum class AlignMode { Smoothness, RandomProjection };

struct AlignOptions {
  std::size_t unified_dim = 64;
  AlignMode mode = AlignMode::Smoothness;
  std::uint64_t seed = 0;  // only used by RandomProjection
};

struct AlignedFeatures {
  Matrix matrix;  // n x unified_dim; column j is projected column smoothness.order[j]
  ProjectionModel projection;
  SmoothnessVector smoothness;
};

inline const char* to_string(AlignMode mode) {
  return mode == AlignMode::Smoothness ? "smoothness" : "random_projection";
}

inline AlignMode align_mode_from_string(const std::string& s) {
  if (s == "smoothness") return AlignMode::Smoothness;
  if (s == "random_projection") return AlignMode::RandomProjection;
  throw Error(ErrorCode::Config, "unknown align mode '" + s + "'");
}

/// Scales each column to [0, 1]; constant columns become 0.
inline Matrix min_max_normalize(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t r = 0; r < x.rows(); ++r) {
      lo = std::min(lo, x(r, c));
      hi = std::max(hi, x(r, c));
    }
    const double span = hi - lo;
    for (std::size_t r = 0; r < x.rows(); ++r) out(r, c) = span > 0.0 ? (x(r, c) - lo) / span : 0.0;
  }
  return out;
}

namespace detail {

// Largest-magnitude entry of each column made positive (first index wins ties).
inline void fix_column_signs(Matrix& basis) {
  for (std::size_t c = 0; c < basis.cols(); ++c) {
    std::size_t arg = 0;
    for (std::size_t r = 1; r < basis.rows(); ++r)
      if (std::abs(basis(r, c)) > std::abs(basis(arg, c))) arg = r;
    if (basis(arg, c) < 0.0)
      for (std::size_t r = 0; r < basis.rows(); ++r) basis(r, c) = -basis(r, c);
  }
}

}  // namespace detail

/// Mean-centred PCA. The basis keeps the top min(d, d_u) directions ordered by
/// descending eigenvalue; equal eigenvalues keep solver index order.
inline ProjectionModel fit_projection(const Matrix& x, std::size_t unified_dim) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (n < 2) throw Error(ErrorCode::DimensionMismatch, "fit_projection needs at least 2 rows");
  if (d == 0) throw Error(ErrorCode::DimensionMismatch, "fit_projection needs at least 1 feature column");

  ProjectionModel model;
  model.source_dim = d;
  model.unified_dim = unified_dim;
  model.mean.assign(d, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) model.mean[c] += x(r, c);
  for (double& m : model.mean) m /= static_cast<double>(n);

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  std::vector<double> centred(d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) centred[c] = x(r, c) - model.mean[c];
    for (std::size_t i = 0; i < d; ++i) {
      if (centred[i] == 0.0) continue;
      for (std::size_t j = i; j < d; ++j) cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += centred[i] * centred[j];
    }
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      cov(ii, jj) /= static_cast<double>(n - 1);
      cov(jj, ii) = cov(ii, jj);
    }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  const Eigen::VectorXd& evals = solver.eigenvalues();   // ascending
  const Eigen::MatrixXd& evecs = solver.eigenvectors();

  std::vector<std::size_t> idx(d);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return evals(static_cast<Eigen::Index>(a)) > evals(static_cast<Eigen::Index>(b));
  });

  const std::size_t k = std::min(d, unified_dim);
  model.basis = Matrix(d, k);
  for (std::size_t c = 0; c < k; ++c) {
    const auto src = static_cast<Eigen::Index>(idx[c]);
    model.eigenvalues.push_back(std::max(0.0, evals(src)));
    for (std::size_t r = 0; r < d; ++r) model.basis(r, c) = evecs(static_cast<Eigen::Index>(r), src);
  }
  detail::fix_column_signs(model.basis);
  model.degenerate = cov.cwiseAbs().maxCoeff() == 0.0;
  return model;
}

/// Seeded random orthonormal basis in place of PCA (the "w/o alignment" ablation).
inline ProjectionModel random_projection(const Matrix& x, std::size_t unified_dim, std::uint64_t seed) {
  const std::size_t d = x.cols();
  const std::size_t k = std::min(d, unified_dim);
  ProjectionModel model;
  model.source_dim = d;
  model.unified_dim = unified_dim;
  model.mean.assign(d, 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < d; ++c) model.mean[c] += x(r, c);
  for (double& m : model.mean) m /= static_cast<double>(std::max<std::size_t>(x.rows(), 1));

  Rng rng(seed);
  Eigen::MatrixXd gaussian(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k));
  for (Eigen::Index c = 0; c < gaussian.cols(); ++c)
    for (Eigen::Index r = 0; r < gaussian.rows(); ++r) gaussian(r, c) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(gaussian.rows(), gaussian.cols());
  model.basis = Matrix(d, k);
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t r = 0; r < d; ++r) model.basis(r, c) = q(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  detail::fix_column_signs(model.basis);
  return model;
}

/// (x - mean) * basis, zero-padded on the right up to unified_dim columns.
inline Matrix project(const ProjectionModel& model, const Matrix& x) {
  if (x.cols() != model.source_dim) throw Error(ErrorCode::DimensionMismatch, "project: source dimension");
  Matrix centred = x;
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) centred(r, c) -= model.mean[c];
  const Matrix reduced = matmul(centred, model.basis);
  if (reduced.cols() == model.unified_dim) return reduced;
  Matrix out(x.rows(), model.unified_dim);
  for (std::size_t r = 0; r < x.rows(); ++r)
    std::copy(reduced.row(r).begin(), reduced.row(r).end(), out.row(r).begin());
  return out;
}

/// s_k = -(1/|E|) * sum over undirected edges of (x_ik - x_jk)^2.
inline SmoothnessVector smoothness(const Graph& g, const Matrix& x) {
  if (x.rows() != g.node_count()) throw Error(ErrorCode::DimensionMismatch, "smoothness: rows != node count");
  if (g.edge_count() == 0) throw Error(ErrorCode::NoEdges, "smoothness is undefined on a graph without edges");
  const std::size_t cols = x.cols();
  SmoothnessVector s;
  s.values.assign(cols, 0.0);
  for (NodeId u = 0; u < g.node_count(); ++u) {
    const auto xu = x.row(u);
    for (NodeId v : g.neighbors(u)) {
      if (v <= u) continue;
      const auto xv = x.row(v);
      for (std::size_t k = 0; k < cols; ++k) {
        const double diff = xu[k] - xv[k];
        s.values[k] += diff * diff;
      }
    }
  }
  const double inv_edges = 1.0 / static_cast<double>(g.edge_count());
  for (double& v : s.values) v = -v * inv_edges;
  s.order.resize(cols);
  std::iota(s.order.begin(), s.order.end(), std::size_t{0});
  std::stable_sort(s.order.begin(), s.order.end(),
                   [&](std::size_t a, std::size_t b) { return s.values[a] < s.values[b]; });
  return s;
}

inline Matrix permute_columns(const Matrix& x, std::span<const std::size_t> order) {
  Matrix out(x.rows(), order.size());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t j = 0; j < order.size(); ++j) out(r, j) = x(r, order[j]);
  return out;
}

/// normalize -> project -> smoothness -> reorder. Zero padding columns (d < d_u)
/// always stay last; RandomProjection skips the reordering.
inline AlignedFeatures align(const Graph& g, const AlignOptions& options = {}) {
  if (g.edge_count() == 0) throw Error(ErrorCode::NoEdges, "cannot align graph '" + g.name() + "' without edges");
  const Matrix normalized = min_max_normalize(g.features());
  AlignedFeatures out;
  out.projection = options.mode == AlignMode::Smoothness
                       ? fit_projection(normalized, options.unified_dim)
                       : random_projection(normalized, options.unified_dim, options.seed);
  const Matrix projected = project(out.projection, normalized);
  out.smoothness = smoothness(g, projected);

  const std::size_t real = out.projection.component_count();
  std::vector<std::size_t> order;
  if (options.mode == AlignMode::Smoothness) {
    for (std::size_t k : out.smoothness.order)
      if (k < real) order.push_back(k);
  } else {
    order.resize(real);
    std::iota(order.begin(), order.end(), std::size_t{0});
  }
  for (std::size_t k = real; k < options.unified_dim; ++k) order.push_back(k);
  out.smoothness.order = order;
  out.matrix = permute_columns(projected, order);
  return out;
}

}  // namespace gad
