#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace gad;
using namespace gad::testing;

namespace {

// 3-cube: 3-regular, so every normalized entry is exactly 1/4.
Graph cube(std::size_t dim, double fill) {
  std::vector<Edge> edges;
  for (NodeId v = 0; v < 8; ++v)
    for (NodeId bit = 1; bit < 8; bit <<= 1)
      if ((v ^ bit) > v) edges.push_back({v, v ^ bit});
  return Graph::from_edges(8, edges, Matrix(8, dim, fill));
}

// Two 5-cliques joined by the single edge (4, 5).
Graph two_blocks() {
  std::vector<Edge> edges;
  for (NodeId a = 0; a < 5; ++a)
    for (NodeId b = a + 1; b < 5; ++b) {
      edges.push_back({a, b});
      edges.push_back({a + 5, b + 5});
    }
  edges.push_back({4, 5});
  Matrix x(10, 1);
  for (std::size_t i = 0; i < 10; ++i) x(i, 0) = i < 5 ? 1.0 : -1.0;
  return Graph::from_edges(10, edges, x);
}

ParamVector random_params(std::size_t input_dim, const EncoderConfig& cfg, std::uint64_t seed) {
  ParamVector p = init_params(input_dim, cfg, seed);
  Rng rng(seed + 1);
  for (const auto& b : p.blocks())
    if (b.rows == 1)
      for (double& v : p.slice(b)) v = 0.1 * rng.normal();  // nonzero biases too
  return p;
}

}  // namespace

TEST(Encoder, ConstantFeaturesOnRegularGraphGiveZero) {
  const EncoderConfig cfg = small_encoder(6, 3);
  for (const Graph& g : {ring(12, 4, 1.0), cube(4, 0.37), cube(4, -12.5)}) {
    const ParamVector p = random_params(4, cfg, 2);
    const Embeddings emb = encode(normalize_adjacency(g), g.features(), p, cfg);
    ASSERT_EQ(emb.h.cols(), 18u);
    for (double v : emb.h.data()) EXPECT_EQ(v, 0.0);
  }
}

TEST(Encoder, SingleHopMatchesDenseOracle) {
  Rng rng(3);
  const Graph g = random_small_graph(15, 0.25, 5, rng);
  const EncoderConfig cfg = small_encoder(4, 1);
  const ParamVector p = random_params(5, cfg, 7);
  const Embeddings emb = encode(normalize_adjacency(g), g.features(), p, cfg);

  auto mlp = [&](const Eigen::MatrixXd& x) {
    Eigen::MatrixXd h = x * to_eigen(p.unpack("mlp.layer0.w"));
    h.rowwise() += to_eigen(p.unpack("mlp.layer0.b")).row(0);
    h = h.cwiseMax(0.0);
    Eigen::MatrixXd out = h * to_eigen(p.unpack("mlp.layer1.w"));
    out.rowwise() += to_eigen(p.unpack("mlp.layer1.b")).row(0);
    return out;
  };
  const Eigen::MatrixXd x0 = to_eigen(g.features());
  const Eigen::MatrixXd oracle = mlp(dense_normalized(g) * x0) - mlp(x0);
  EXPECT_LE(max_abs_diff(emb.h, oracle), 1e-12);
}

TEST(Encoder, TapedRowsMatchPlainForward) {
  Rng rng(4);
  const Graph g = random_small_graph(20, 0.2, 6, rng);
  const EncoderConfig cfg = small_encoder(5, 2);
  const ParamVector p = random_params(6, cfg, 1);
  const PropagatedFeatures x = propagate_hops(normalize_adjacency(g), g.features(), 2);
  const Embeddings emb = encode(x, p, cfg);
  const std::vector<NodeId> rows{3, 0, 17, 9};
  Tape tape;
  const ModelVars vars = bind_model(tape, p, cfg);
  const Matrix taped = tape.value(encode_rows(tape, vars, x, rows));
  EXPECT_EQ(max_abs_diff(taped, gather_rows(emb.h, rows)), 0.0);
}

TEST(Encoder, ParameterCount) {
  const EncoderConfig cfg = small_encoder(64, 2);
  const ParamVector p = model_layout(64, cfg);
  EXPECT_EQ(p.size(), (64u * 64 + 64) + (64u * 64 + 64) + 2u * 128 * 128);
  EXPECT_EQ(cfg.embedding_dim(), 128u);
  EXPECT_THROW(require_architecture(p, 32, cfg), Error);
}

TEST(Encoder, IdentityHookIsHighPass) {
  const Graph g = two_blocks();
  const PropagatedFeatures x = propagate_hops(normalize_adjacency(g), g.features(), 1);
  const Matrix r1 = residual_embeddings(x, [](const Matrix& m) { return m; });
  const Eigen::MatrixXd oracle =
      (dense_normalized(g) - Eigen::MatrixXd::Identity(10, 10)) * to_eigen(g.features());
  EXPECT_LE(max_abs_diff(r1, oracle), 1e-14);
  double boundary = std::min(std::abs(r1(4, 0)), std::abs(r1(5, 0)));
  for (NodeId v : {0, 1, 2, 3, 6, 7, 8, 9}) EXPECT_GT(boundary, std::abs(r1(v, 0))) << v;
}

TEST(Encoder, HopMismatchRejected) {
  const Graph g = ring(6, 2);
  const PropagatedFeatures x = propagate_hops(normalize_adjacency(g), g.features(), 1);
  EXPECT_THROW(encode(x, init_params(2, small_encoder(4, 2), 0), small_encoder(4, 2)), Error);
}

TEST(Attention, SingleContextRowIsCopied) {
  Rng rng(5);
  const EncoderConfig cfg = small_encoder(3, 2);
  const ParamVector p = init_params(4, cfg, 5);
  const Matrix hq = random_matrix(7, 6, rng), hk = random_matrix(1, 6, rng);
  const AttentionResult att = cross_attend(hq, hk, p);
  for (std::size_t i = 0; i < 7; ++i) {
    EXPECT_EQ(att.weights(i, 0), 1.0);
    for (std::size_t c = 0; c < 6; ++c) EXPECT_EQ(att.reconstructed(i, c), hk(0, c));
  }
}

TEST(Attention, ZeroProjectionsGiveCentroid) {
  Rng rng(6);
  const EncoderConfig cfg = small_encoder(3, 2);
  ParamVector p = init_params(4, cfg, 5);
  p.pack("attn.wq", Matrix(6, 6));
  p.pack("attn.wk", Matrix(6, 6));
  const Matrix hq = random_matrix(5, 6, rng), hk = random_matrix(4, 6, rng);
  const AttentionResult att = cross_attend(hq, hk, p);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t c = 0; c < 6; ++c) {
      double mean = 0.0;
      for (std::size_t k = 0; k < 4; ++k) mean += hk(k, c) / 4.0;
      EXPECT_NEAR(att.reconstructed(i, c), mean, 1e-12);
      if (c < 4) EXPECT_EQ(att.weights(i, c), 0.25);
    }
}

TEST(Attention, WeightsOnSimplexAndReconstructionInHull) {
  Rng rng(7);
  const EncoderConfig cfg = small_encoder(4, 2);
  const ParamVector p = init_params(4, cfg, 8);
  const Matrix hq = random_matrix(20, 8, rng, 3.0), hk = random_matrix(6, 8, rng, 3.0);
  const AttentionResult att = cross_attend(hq, hk, p);
  for (std::size_t i = 0; i < 20; ++i) {
    double sum = 0.0;
    for (double w : att.weights.row(i)) {
      EXPECT_GE(w, 0.0);
      sum += w;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    for (std::size_t c = 0; c < 8; ++c) {
      double lo = hk(0, c), hi = hk(0, c);
      for (std::size_t k = 1; k < 6; ++k) {
        lo = std::min(lo, hk(k, c));
        hi = std::max(hi, hk(k, c));
      }
      EXPECT_GE(att.reconstructed(i, c), lo - 1e-12);
      EXPECT_LE(att.reconstructed(i, c), hi + 1e-12);
    }
  }
}

TEST(Attention, ContextOrderDoesNotMatter) {
  Rng rng(8);
  const ParamVector p = init_params(4, small_encoder(4, 2), 3);
  const Matrix hq = random_matrix(9, 8, rng), hk = random_matrix(5, 8, rng);
  const std::vector<std::size_t> perm{3, 1, 4, 0, 2};
  const AttentionResult a = cross_attend(hq, hk, p);
  const AttentionResult b = cross_attend(hq, gather_rows(hk, perm), p);
  EXPECT_LE(max_abs_diff(a.reconstructed, b.reconstructed), 1e-12);
}

TEST(Attention, ShapeErrors) {
  const ParamVector p = init_params(4, small_encoder(4, 2), 3);
  EXPECT_THROW(cross_attend(Matrix(2, 8), Matrix(0, 8), p), Error);
  EXPECT_THROW(cross_attend(Matrix(2, 8), Matrix(2, 7), p), Error);
  EXPECT_THROW(cross_attend(Matrix(2, 6), Matrix(2, 6), p), Error);
}

TEST(Scores, ReconstructionDistance) {
  const Matrix h{{1.0, 2.0, 3.0}, {0.0, 0.0, 0.0}};
  for (double s : reconstruction_scores(h, h)) EXPECT_EQ(s, 0.0);
  const Matrix shifted{{1.0, 5.0, 3.0}, {0.0, 0.0, 0.0}};
  EXPECT_EQ(reconstruction_scores(h, shifted)[0], 3.0);

  Rng rng(9);
  const Matrix a = random_matrix(10, 6, rng), b = random_matrix(10, 6, rng);
  const auto s = reconstruction_scores(a, b);
  for (std::size_t i = 0; i < 10; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < 6; ++c) acc += (a(i, c) - b(i, c)) * (a(i, c) - b(i, c));
    EXPECT_NEAR(s[i], std::sqrt(acc), 1e-12);
  }
}

TEST(Loss, MarginCosineCases) {
  const std::vector<std::uint8_t> normal{0}, anomaly{1};
  const Matrix h{{3.0, 4.0}};
  EXPECT_NEAR(margin_cosine_loss(h, h, normal, 0.0), 0.0, 1e-15);

  // cos = 0.9: h = (1, 0), h~ = (0.9, sqrt(1 - 0.81)).
  const Matrix q{{1.0, 0.0}};
  const Matrix r{{0.9, std::sqrt(1.0 - 0.81)}};
  EXPECT_NEAR(margin_cosine_loss(q, r, anomaly, 0.5), 0.4, 1e-12);
  EXPECT_NEAR(margin_cosine_loss(q, r, anomaly, 0.9), 0.0, 1e-12);
  EXPECT_NEAR(margin_cosine_loss(q, r, normal, 0.5), 0.1, 1e-12);

  // Mean over a batch.
  const Matrix qq{{1.0, 0.0}, {1.0, 0.0}};
  const Matrix rr{{0.9, std::sqrt(1.0 - 0.81)}, {1.0, 0.0}};
  const std::vector<std::uint8_t> mixed{1, 0};
  EXPECT_NEAR(margin_cosine_loss(qq, rr, mixed, 0.5), 0.2, 1e-12);
}

TEST(FewShot, ScoresQueriesOnly) {
  Rng rng(10);
  const Graph g = random_small_graph(25, 0.2, 4, rng);
  const EncoderConfig cfg = small_encoder(4, 2);
  const ParamVector p = init_params(4, cfg, 1);
  const Embeddings emb = encode(normalize_adjacency(g), g.features(), p, cfg);
  const std::vector<NodeId> ctx{20, 3, 7};
  const ScoreVector s = score_few_shot(emb, p, ctx);
  ASSERT_EQ(s.size(), 22u);
  EXPECT_TRUE(std::is_sorted(s.nodes.begin(), s.nodes.end()));
  for (NodeId v : ctx) EXPECT_EQ(std::find(s.nodes.begin(), s.nodes.end(), v), s.nodes.end());
  for (double v : s.values) EXPECT_GE(v, 0.0);

  EXPECT_THROW(score_few_shot(emb, p, std::vector<NodeId>{}), Error);
  EXPECT_THROW(score_few_shot(emb, p, std::vector<NodeId>{3, 3}), Error);
  EXPECT_THROW(score_few_shot(emb, p, std::vector<NodeId>{99}), Error);
}
