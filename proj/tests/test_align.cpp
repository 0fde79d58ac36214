#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace gad;
using namespace gad::testing;

TEST(Projection, IdenticalRowsProjectToZero) {
  const Matrix x(6, 3, 0.25);
  const ProjectionModel model = fit_projection(x, 2);
  EXPECT_TRUE(model.degenerate);
  const Matrix projected = project(model, x);
  for (double v : projected.data()) EXPECT_EQ(v, 0.0);
}

TEST(Projection, LineYEqualsX) {
  Matrix x(5, 2);
  for (std::size_t i = 0; i < 5; ++i) x(i, 0) = x(i, 1) = static_cast<double>(i);
  const ProjectionModel model = fit_projection(x, 1);
  ASSERT_EQ(model.basis.cols(), 1u);
  EXPECT_NEAR(model.basis(0, 0), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(model.basis(1, 0), 1.0 / std::sqrt(2.0), 1e-12);

  const Matrix p = project(model, x);
  double projected = 0.0, total = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    projected += p(i, 0) * p(i, 0);
    total += std::pow(x(i, 0) - 2.0, 2) + std::pow(x(i, 1) - 2.0, 2);
  }
  EXPECT_NEAR(projected, total, 1e-10);
}

TEST(Projection, FullRankRoundTrip) {
  Rng rng(21);
  const Matrix x = random_matrix(20, 8, rng);
  const ProjectionModel model = fit_projection(x, 8);
  const Matrix p = project(model, x);
  // mean + P * B^T, evaluated with Eigen.
  Eigen::MatrixXd rec = to_eigen(p) * to_eigen(model.basis).transpose();
  for (Eigen::Index r = 0; r < rec.rows(); ++r)
    for (Eigen::Index c = 0; c < rec.cols(); ++c) rec(r, c) += model.mean[static_cast<std::size_t>(c)];
  EXPECT_LE(max_abs_diff(x, rec), 1e-8);
  // Orthonormal columns, eigenvalues non-increasing.
  const Eigen::MatrixXd b = to_eigen(model.basis);
  EXPECT_LE((b.transpose() * b - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-10);
  for (std::size_t i = 1; i < model.eigenvalues.size(); ++i) EXPECT_GE(model.eigenvalues[i - 1], model.eigenvalues[i]);
}

TEST(Projection, EigenvaluesAreProjectedVariances) {
  Rng rng(4);
  const Matrix x = random_matrix(40, 5, rng);
  const ProjectionModel model = fit_projection(x, 3);
  const Matrix p = project(model, x);
  for (std::size_t c = 0; c < 3; ++c) {
    double var = 0.0;
    for (std::size_t r = 0; r < 40; ++r) var += p(r, c) * p(r, c);
    EXPECT_NEAR(var / 39.0, model.eigenvalues[c], 1e-10);
  }
}

TEST(Projection, PadsWithZeroColumns) {
  Rng rng(1);
  const Matrix x = random_matrix(10, 3, rng);
  const ProjectionModel model = fit_projection(x, 6);
  const Matrix p = project(model, x);
  ASSERT_EQ(p.cols(), 6u);
  for (std::size_t r = 0; r < 10; ++r)
    for (std::size_t c = 3; c < 6; ++c) EXPECT_EQ(p(r, c), 0.0);
}

TEST(Projection, SignConvention) {
  Rng rng(2);
  const Matrix x = random_matrix(30, 4, rng);
  const ProjectionModel model = fit_projection(x, 4);
  for (std::size_t c = 0; c < 4; ++c) {
    double best = 0.0;
    for (std::size_t r = 0; r < 4; ++r)
      if (std::abs(model.basis(r, c)) > std::abs(best)) best = model.basis(r, c);
    EXPECT_GT(best, 0.0);
  }
}

TEST(Smoothness, ConstantColumnIsZero) {
  Rng rng(5);
  const Graph g = random_small_graph(10, 0.3, 1, rng);
  EXPECT_EQ(smoothness(g, Matrix(10, 1, 3.0)).values[0], 0.0);
}

TEST(Smoothness, PathExample) {
  const Matrix x{{0.0}, {1.0}, {2.0}};
  const Graph g = path(3, x);
  EXPECT_DOUBLE_EQ(smoothness(g, x).values[0], -1.0);
}

TEST(Smoothness, OrderIsAscending) {
  // Columns with s = (-0.5, -2.0, 0.0) on the path 0-1-2.
  const Matrix x{{0.0, 0.0, 1.0}, {1.0, 2.0, 1.0}, {1.0, 2.0, 1.0}};
  const Graph g = path(3, x);
  const SmoothnessVector s = smoothness(g, x);
  EXPECT_DOUBLE_EQ(s.values[0], -0.5);
  EXPECT_DOUBLE_EQ(s.values[1], -2.0);
  EXPECT_DOUBLE_EQ(s.values[2], 0.0);
  EXPECT_EQ(s.order, (std::vector<std::size_t>{1, 0, 2}));
  const Matrix sorted = permute_columns(x, s.order);
  EXPECT_EQ(sorted(1, 0), 2.0);
  EXPECT_EQ(sorted(1, 1), 1.0);
}

TEST(Smoothness, LaplacianQuadraticForm) {
  // x^T L x sums each undirected edge once; the sum in s_k runs over ordered
  // pairs (|E| = 2m), so s_k = -(2 / 2m) x^T L x.
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const Graph g = random_small_graph(30, 0.15, 4, rng);
    const Eigen::MatrixXd a = dense_adjacency(g);
    const Eigen::MatrixXd lap = Eigen::MatrixXd(a.rowwise().sum().asDiagonal()) - a;
    const Eigen::MatrixXd x = to_eigen(g.features());
    const SmoothnessVector s = smoothness(g, g.features());
    const double directed = 2.0 * static_cast<double>(g.edge_count());
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
      const double oracle = -(2.0 / directed) * x.col(k).dot(lap * x.col(k));
      EXPECT_NEAR(s.values[static_cast<std::size_t>(k)], oracle, 1e-10);
      EXPECT_LE(s.values[static_cast<std::size_t>(k)], 0.0);
    }
  }
}

TEST(Smoothness, ScaleCovariance) {
  Rng rng(7);
  const Graph g = random_small_graph(15, 0.3, 2, rng);
  Matrix scaled = g.features();
  for (std::size_t r = 0; r < 15; ++r) scaled(r, 1) *= 3.0;
  const auto base = smoothness(g, g.features());
  const auto after = smoothness(g, scaled);
  EXPECT_NEAR(after.values[1], 9.0 * base.values[1], 1e-12);
  EXPECT_EQ(after.values[0], base.values[0]);
}

TEST(Smoothness, NoEdges) {
  const Graph g = Graph::from_edges(3, std::span<const Edge>{}, Matrix(3, 1));
  try {
    smoothness(g, g.features());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoEdges);
  }
}

TEST(Align, FirstColumnIsLeastSmooth) {
  Rng rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    const Graph g = random_small_graph(40, 0.1, 12, rng);
    AlignOptions opt;
    opt.unified_dim = 8;
    const AlignedFeatures a = align(g, opt);
    ASSERT_EQ(a.matrix.cols(), 8u);
    // Independent recomputation on the output must come out sorted.
    const SmoothnessVector s = smoothness(g, a.matrix);
    for (std::size_t k = 1; k < 8; ++k) EXPECT_LE(s.values[k - 1], s.values[k] + 1e-12);
    // The recorded order is a permutation.
    std::vector<std::size_t> order = a.smoothness.order;
    std::sort(order.begin(), order.end());
    for (std::size_t k = 0; k < 8; ++k) EXPECT_EQ(order[k], k);
  }
}

TEST(Align, PaddingStaysLast) {
  Rng rng(9);
  const Graph g = random_small_graph(30, 0.2, 3, rng);
  AlignOptions opt;
  opt.unified_dim = 7;
  const AlignedFeatures a = align(g, opt);
  for (std::size_t r = 0; r < 30; ++r)
    for (std::size_t c = 3; c < 7; ++c) EXPECT_EQ(a.matrix(r, c), 0.0);
  EXPECT_EQ(a.smoothness.order[3], 3u);
  EXPECT_EQ(a.smoothness.order[6], 6u);
}

TEST(Align, InvariantToFeatureScaleAndShift) {
  Rng rng(10);
  const Graph g = random_small_graph(25, 0.2, 5, rng);
  Matrix affine = g.features();
  for (double& v : affine.data()) v = 4.0 * v - 7.0;
  AlignOptions opt;
  opt.unified_dim = 5;
  EXPECT_LE(max_abs_diff(align(g, opt).matrix, align(g.with_features(affine), opt).matrix), 1e-9);
}

TEST(Align, RandomProjectionAblation) {
  Rng rng(11);
  const Graph g = random_small_graph(30, 0.2, 10, rng);
  AlignOptions opt;
  opt.unified_dim = 6;
  opt.mode = AlignMode::RandomProjection;
  opt.seed = 3;
  const AlignedFeatures a = align(g, opt);
  const Eigen::MatrixXd b = to_eigen(a.projection.basis);
  EXPECT_LE((b.transpose() * b - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-12);
  for (std::size_t k = 0; k < 6; ++k) EXPECT_EQ(a.smoothness.order[k], k);
  EXPECT_TRUE(align(g, opt).matrix == a.matrix);
  opt.seed = 4;
  EXPECT_FALSE(align(g, opt).matrix == a.matrix);
  EXPECT_EQ(align_mode_from_string("random_projection"), AlignMode::RandomProjection);
  EXPECT_THROW(align_mode_from_string("pca"), Error);
}

TEST(Align, MinMaxNormalize) {
  const Matrix x{{1.0, 5.0}, {3.0, 5.0}, {2.0, 5.0}};
  const Matrix y = min_max_normalize(x);
  EXPECT_EQ(y(0, 0), 0.0);
  EXPECT_EQ(y(1, 0), 1.0);
  EXPECT_EQ(y(2, 0), 0.5);
  for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(y(r, 1), 0.0);
}
