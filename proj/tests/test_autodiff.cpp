#include <gtest/gtest.h>

#include <functional>
#include <sstream>

#include "test_support.hpp"

using namespace gad;
using namespace gad::testing;

namespace {

ParamVector two_blocks(Rng& rng, std::size_t r1, std::size_t c1, std::size_t r2, std::size_t c2) {
  ParamVector p;
  p.add_block("a", r1, c1);
  p.add_block("b", r2, c2);
  for (double& v : p.values()) v = rng.normal();
  return p;
}

/// Max abs difference between the taped gradient and central differences.
double fd_error(const ParamVector& params, const std::function<Var(Tape&, Var, Var)>& build) {
  auto loss_at = [&](const ParamVector& p) {
    Tape t;
    return t.value(build(t, t.param(p, "a"), t.param(p, "b")))(0, 0);
  };
  Tape tape;
  const Var loss = build(tape, tape.param(params, "a"), tape.param(params, "b"));
  const ParamVector g = tape.gradient(loss, params);
  ParamVector probe = params;
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double orig = probe.values()[i];
    probe.values()[i] = orig + 1e-6;
    const double up = loss_at(probe);
    probe.values()[i] = orig - 1e-6;
    const double down = loss_at(probe);
    probe.values()[i] = orig;
    worst = std::max(worst, std::abs((up - down) / 2e-6 - g.values()[i]));
  }
  return worst;
}

}  // namespace

TEST(Kernels, MatmulMatchesTripleLoop) {
  const Matrix a{{1, 2, 3}, {4, 5, 6}};
  const Matrix b{{7, 8}, {9, 10}, {11, 12}};
  const Matrix c = matmul(a, b);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < 3; ++k) acc += a(i, k) * b(k, j);
      EXPECT_NEAR(c(i, j), acc, 1e-14);
    }
  EXPECT_EQ(c(0, 0), 58.0);
  EXPECT_EQ(c(1, 1), 154.0);
  EXPECT_THROW(matmul(a, a), Error);
  EXPECT_TRUE(matmul_bt(a, a) == matmul(a, transpose(a)));
  EXPECT_TRUE(matmul_at(a, a) == matmul(transpose(a), a));
}

TEST(Kernels, SoftmaxOfEqualRowIsUniform) {
  const Matrix s = softmax_rows(Matrix(1, 4, 3.5));
  for (double v : s.data()) EXPECT_DOUBLE_EQ(v, 0.25);
  // Large logits do not overflow.
  const Matrix big = softmax_rows(Matrix{{1000.0, 1000.0}});
  EXPECT_DOUBLE_EQ(big(0, 0), 0.5);
}

TEST(Kernels, ReluOfNegativesIsZero) {
  const Matrix r = relu(Matrix(3, 3, -2.0));
  for (double v : r.data()) EXPECT_EQ(v, 0.0);
}

TEST(Tape, MeanGradientIsUniform) {
  ParamVector p;
  p.add_block("w", 3, 4);
  for (std::size_t i = 0; i < p.size(); ++i) p.values()[i] = static_cast<double>(i) - 5.0;
  Tape tape;
  const ParamVector g = tape.gradient(tape.mean(tape.param(p, "w")), p);
  for (double v : g.values()) EXPECT_DOUBLE_EQ(v, 1.0 / 12.0);
}

TEST(Tape, LossMustBeScalar) {
  ParamVector p;
  p.add_block("w", 2, 2);
  Tape tape;
  const Var w = tape.param(p, "w");
  EXPECT_THROW(tape.gradient(w, p), Error);
}

TEST(Tape, HingeFlatRegionHasZeroGradient) {
  // Anomalous sample whose cosine is below the margin contributes nothing.
  ParamVector p;
  p.add_block("a", 1, 2);
  p.add_block("b", 1, 2);
  p.pack("a", Matrix{{1.0, 0.0}});
  p.pack("b", Matrix{{0.0, 1.0}});  // cos = 0 <= margin 0.2
  Tape tape;
  const std::vector<std::uint8_t> y{1};
  const Var loss = tape.mean(tape.margin_hinge(tape.row_cosine(tape.param(p, "a"), tape.param(p, "b")), y, 0.2));
  EXPECT_EQ(tape.value(loss)(0, 0), 0.0);
  const ParamVector g = tape.gradient(loss, p);
  for (double v : g.values()) EXPECT_EQ(v, 0.0);
}

TEST(Tape, ZeroNormCosineIsDegenerate) {
  Tape tape;
  const Var a = tape.constant(Matrix{{0.0, 0.0}});
  const Var b = tape.constant(Matrix{{1.0, 0.0}});
  try {
    tape.row_cosine(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateEmbedding);
    EXPECT_EQ(e.category(), ErrorCategory::Numeric);
  }
}

TEST(Tape, PerOpGradientsMatchFiniteDifferences) {
  Rng rng(31);
  const std::vector<std::uint8_t> labels{0, 1, 0, 1};
  struct Case {
    const char* name;
    std::size_t r1, c1, r2, c2;
    std::function<Var(Tape&, Var, Var)> build;
  };
  const std::vector<Case> cases{
      {"matmul", 4, 3, 3, 2, [](Tape& t, Var a, Var b) { return t.mean(t.matmul(a, b)); }},
      {"matmul_bt", 4, 3, 2, 3, [](Tape& t, Var a, Var b) { return t.mean(t.matmul_bt(a, b)); }},
      {"add_bias", 4, 3, 1, 3,
       [](Tape& t, Var a, Var b) { return t.mean(t.relu(t.add_bias(a, b))); }},
      {"softmax", 4, 3, 3, 3,
       [](Tape& t, Var a, Var b) { return t.mean(t.matmul(t.softmax_rows(t.scale(a, 0.7)), b)); }},
      {"subtract", 4, 3, 4, 3, [](Tape& t, Var a, Var b) { return t.mean(t.row_l2(t.subtract(a, b))); }},
      {"concat", 4, 3, 4, 2,
       [](Tape& t, Var a, Var b) {
         const std::vector<Var> parts{a, b};
         return t.mean(t.row_l2(t.concat_cols(parts)));
       }},
      {"cosine_hinge", 4, 3, 4, 3,
       [&labels](Tape& t, Var a, Var b) { return t.mean(t.margin_hinge(t.row_cosine(a, b), labels, -1.0)); }},
  };
  for (const auto& c : cases) {
    const ParamVector p = two_blocks(rng, c.r1, c.c1, c.r2, c.c2);
    EXPECT_LE(fd_error(p, c.build), 1e-7) << c.name;
  }
}

TEST(Tape, EpisodeLossGradientSmallInstance) {
  Rng rng(5);
  const Graph g = random_small_graph(16, 0.3, 6, rng);
  std::vector<std::uint8_t> labels(16, 0);
  for (NodeId v : {1, 5, 9, 13}) labels[v] = 1;
  const Graph lg = g.with_labels(labels);
  const EncoderConfig cfg = small_encoder(4);
  const PropagatedFeatures x = propagate_hops(normalize_adjacency(lg), align(lg, {6}).matrix, cfg.hops);
  TrainConfig tc;
  tc.context_size = 3;
  Rng ep_rng(2);
  const Episode ep = sample_episode(lg, tc, ep_rng);
  const GradientCheck r = check_episode_gradient(init_params(6, cfg, 3), cfg, x, ep, 0.0);
  EXPECT_LE(r.max_relative_error, 1e-4);
  EXPECT_EQ(r.checked, init_params(6, cfg, 3).size());
}

TEST(Adam, ZeroGradientLeavesParams) {
  ParamVector p;
  p.add_block("w", 2, 3);
  for (double& v : p.values()) v = 0.3;
  const ParamVector before = p;
  Adam opt(p);
  opt.step(p, p.zeros_like());
  EXPECT_TRUE(p == before);
}

TEST(Adam, FirstStepIsSignedLearningRate) {
  ParamVector p;
  p.add_block("w", 1, 3);
  ParamVector g = p.zeros_like();
  g.values()[0] = 2.0;
  g.values()[1] = -0.01;
  g.values()[2] = 50.0;
  Adam opt(p, AdamOptions{0.01});
  opt.step(p, g);
  // t = 1: m_hat = g, v_hat = g^2 -> update = -lr * g / (|g| + eps).
  for (std::size_t i = 0; i < 3; ++i) {
    const double gi = g.values()[i];
    EXPECT_NEAR(p.values()[i], -0.01 * gi / (std::abs(gi) + 1e-8), 1e-15);
  }
}

TEST(Adam, ConstantGradientStepApproachesLearningRate) {
  ParamVector p;
  p.add_block("w", 1, 1);
  ParamVector g = p.zeros_like();
  g.values()[0] = -0.5;
  Adam opt(p);
  double prev = 0.0, last_step = 0.0;
  for (int i = 0; i < 5000; ++i) {
    opt.step(p, g);
    last_step = p.values()[0] - prev;
    prev = p.values()[0];
  }
  EXPECT_NEAR(last_step, 1e-3, 1e-8);
  EXPECT_EQ(opt.steps(), 5000);
}

TEST(Params, FileRoundTrip) {
  Rng rng(1);
  ParamVector p = init_params(5, small_encoder(4), 9);
  std::stringstream buf;
  write_params(buf, p, "meta");
  std::string meta;
  const ParamVector back = read_params(buf, &meta);
  EXPECT_TRUE(back == p);
  EXPECT_EQ(meta, "meta");
  std::stringstream bad("GADX");
  EXPECT_THROW(read_params(bad), Error);
}
