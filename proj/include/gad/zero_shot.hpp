#pragma once

// Zero-shot scoring with pseudo-context nodes.
//
//   1. pick n_k initial pseudo-normal nodes (k-means medoids by default);
//   2. for t = 1..T: score V \ V_k[t] against V_k[t], give the context nodes
//      the round's minimum query score, and take the n_k lowest-scoring
//      queries as V_k[t+1] (previous context returns to the pool);
//   3. final score = mean of the T imputed rounds.
//
// The graph's labels are stripped before anything else runs.

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "gad/kmeans.hpp"
#include "gad/pipeline.hpp"

namespace gad {

enum class InitStrategy { FeatureKMeans, Random, MeanDegree, EmbeddingKMeans };

inline const char* to_string(InitStrategy s) {
  switch (s) {
    case InitStrategy::FeatureKMeans: return "feature_kmeans";
    case InitStrategy::Random: return "random";
    case InitStrategy::MeanDegree: return "mean_degree";
    case InitStrategy::EmbeddingKMeans: return "embedding_kmeans";
  }
  return "feature_kmeans";
}

inline InitStrategy init_strategy_from_string(const std::string& s) {
  if (s == "feature_kmeans") return InitStrategy::FeatureKMeans;
  if (s == "random") return InitStrategy::Random;
  if (s == "mean_degree") return InitStrategy::MeanDegree;
  if (s == "embedding_kmeans") return InitStrategy::EmbeddingKMeans;
  throw Error(ErrorCode::Config, "unknown init strategy '" + s + "'");
}

struct ZeroShotConfig {
  std::size_t context_size = 10;  // n_k
  std::size_t rounds = 3;         // T
  InitStrategy init = InitStrategy::FeatureKMeans;
  KMeansOptions kmeans;
  std::uint64_t seed = 0;         // random init
  std::optional<std::vector<NodeId>> initial_context;  // overrides `init` when set

  void validate(std::size_t n) const {
    require(context_size >= 1, ErrorCode::Config, "zero-shot context size must be >= 1");
    require(rounds >= 1, ErrorCode::Config, "zero-shot rounds must be >= 1");
    require(context_size * rounds < n, ErrorCode::Config,
            "zero-shot needs n_k * T < n (n_k=" + std::to_string(context_size) + ", T=" + std::to_string(rounds) +
                ", n=" + std::to_string(n) + ")");
    if (initial_context) {
      require(initial_context->size() == context_size, ErrorCode::Config, "initial context must hold n_k nodes");
    }
  }
};

struct ZeroShotRound {
  std::vector<NodeId> context;
  std::vector<NodeId> query;
  std::vector<double> query_scores;  // aligned with `query`
  std::vector<double> imputed;       // length n
};

struct ZeroShotTrace {
  std::vector<ZeroShotRound> rounds;
  std::string init_strategy;
};

// ---- initialisation -------------------------------------------------------

/// For each k-means cluster, the member closest to its centroid (ties by index).
inline std::vector<NodeId> cluster_medoids(const Matrix& x, std::size_t k, const KMeansOptions& options) {
  const KMeansResult km = kmeans(x, k, options);
  std::vector<NodeId> best(k, x.rows());
  std::vector<double> best_dist(k, std::numeric_limits<double>::infinity());
  for (NodeId i = 0; i < x.rows(); ++i) {
    const std::size_t c = km.assignment[i];
    const double d = squared_distance(x.row(i), km.centroids.row(c));
    if (d < best_dist[c]) {
      best_dist[c] = d;
      best[c] = i;
    }
  }
  // A cluster can only be empty after a repair on the final Lloyd step; fill
  // it with the unselected node nearest to its centroid.
  std::vector<char> taken(x.rows(), 0);
  for (NodeId v : best)
    if (v < x.rows()) taken[v] = 1;
  for (std::size_t c = 0; c < k; ++c) {
    if (best[c] < x.rows()) continue;
    double bd = std::numeric_limits<double>::infinity();
    for (NodeId i = 0; i < x.rows(); ++i) {
      if (taken[i]) continue;
      const double d = squared_distance(x.row(i), km.centroids.row(c));
      if (d < bd) {
        bd = d;
        best[c] = i;
      }
    }
    taken[best[c]] = 1;
  }
  std::sort(best.begin(), best.end());
  return best;
}

/// The n_k nodes whose degree is closest to the mean degree (ties by index).
inline std::vector<NodeId> mean_degree_nodes(const Graph& g, std::size_t k) {
  const std::size_t n = g.node_count();
  double mean = 0.0;
  for (NodeId v = 0; v < n; ++v) mean += static_cast<double>(g.degree(v));
  mean /= static_cast<double>(n);
  std::vector<NodeId> idx(n);
  std::iota(idx.begin(), idx.end(), NodeId{0});
  std::stable_sort(idx.begin(), idx.end(), [&](NodeId a, NodeId b) {
    return std::abs(static_cast<double>(g.degree(a)) - mean) < std::abs(static_cast<double>(g.degree(b)) - mean);
  });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline std::vector<NodeId> init_pseudo_context(const PreparedGraph& p, const Embeddings& emb, const ZeroShotConfig& cfg) {
  const std::size_t n = p.graph.node_count();
  require(n >= cfg.context_size, ErrorCode::Config, "graph smaller than pseudo-context");
  if (cfg.initial_context) {
    ContextSplit::complement(n, *cfg.initial_context);  // validates ids
    return *cfg.initial_context;
  }
  switch (cfg.init) {
    case InitStrategy::FeatureKMeans:
      return cluster_medoids(p.aligned.matrix, cfg.context_size, cfg.kmeans);
    case InitStrategy::EmbeddingKMeans:
      return cluster_medoids(emb.h, cfg.context_size, cfg.kmeans);
    case InitStrategy::MeanDegree:
      return mean_degree_nodes(p.graph, cfg.context_size);
    case InitStrategy::Random: {
      std::vector<NodeId> all(n);
      std::iota(all.begin(), all.end(), NodeId{0});
      Rng rng(cfg.seed);
      auto picked = rng.sample(std::span<const NodeId>(all), cfg.context_size);
      std::sort(picked.begin(), picked.end());
      return picked;
    }
  }
  return {};
}

// ---- rounds ---------------------------------------------------------------

struct RefineResult {
  std::vector<double> query_scores;
  ContextSplit next;
};

/// The k smallest-scoring entries of `ids` (ties by node id), ascending by id.
inline std::vector<NodeId> lowest_scoring(std::span<const NodeId> ids, std::span<const double> scores, std::size_t k) {
  std::vector<std::size_t> pos(ids.size());
  std::iota(pos.begin(), pos.end(), std::size_t{0});
  k = std::min(k, pos.size());
  std::partial_sort(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(k), pos.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] < scores[b];
    return ids[a] < ids[b];
  });
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(ids[pos[i]]);
  std::sort(out.begin(), out.end());
  return out;
}

inline RefineResult refine_round(const Embeddings& emb, const ContextSplit& split, const ParamVector& params,
                                 std::size_t next_context_size) {
  const std::size_t n = emb.h.rows();
  split.validate(n);
  const Matrix hq = gather_rows(emb.h, split.query);
  const AttentionResult att = cross_attend(hq, gather_rows(emb.h, split.context), params);
  RefineResult r;
  r.query_scores = reconstruction_scores(hq, att.reconstructed);
  r.next = ContextSplit::complement(n, lowest_scoring(split.query, r.query_scores, next_context_size));
  return r;
}

/// Full-length scores for one round: queries keep their score, context nodes
/// get the round's minimum query score.
inline std::vector<double> impute_round(std::size_t n, const ZeroShotRound& round) {
  require(round.query.size() == round.query_scores.size(), ErrorCode::Contract, "query/score length mismatch");
  require(round.context.size() + round.query.size() == n && !round.query.empty(), ErrorCode::Contract,
          "round does not partition the node set");
  std::vector<std::uint8_t> seen(n, 0);
  for (const auto* ids : {&round.context, &round.query})
    for (NodeId v : *ids) {
      require(v < n, ErrorCode::IndexOutOfRange, "round node id out of range");
      require(!seen[v], ErrorCode::Contract, "node appears twice in a round");
      seen[v] = 1;
    }
  std::vector<double> out(n, 0.0);
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < round.query.size(); ++i) {
    out[round.query[i]] = round.query_scores[i];
    lowest = std::min(lowest, round.query_scores[i]);
  }
  for (NodeId v : round.context) out[v] = lowest;
  return out;
}

/// Imputes every round (refreshing `imputed`) and averages them.
inline ScoreVector impute_and_average(ZeroShotTrace& trace, std::size_t n) {
  require(!trace.rounds.empty(), ErrorCode::Contract, "no completed rounds");
  ScoreVector out;
  out.nodes.resize(n);
  std::iota(out.nodes.begin(), out.nodes.end(), NodeId{0});
  out.values.assign(n, 0.0);
  for (auto& round : trace.rounds) {
    round.imputed = impute_round(n, round);
    for (std::size_t i = 0; i < n; ++i) out.values[i] += round.imputed[i];
    out.round_history.push_back(round.imputed);
  }
  const double inv = 1.0 / static_cast<double>(trace.rounds.size());
  for (double& v : out.values) v *= inv;
  return out;
}

struct ZeroShotOutput {
  ScoreVector scores;
  ZeroShotTrace trace;
};

/// Zero-shot from an already prepared graph and its embeddings.
inline ZeroShotOutput score_zero_shot(const PreparedGraph& p, const Embeddings& emb, const Model& model,
                                      const ZeroShotConfig& cfg) {
  const std::size_t n = p.graph.node_count();
  cfg.validate(n);
  ZeroShotOutput out;
  out.trace.init_strategy = cfg.initial_context ? "fixed" : to_string(cfg.init);
  ContextSplit split = ContextSplit::complement(n, init_pseudo_context(p, emb, cfg));
  for (std::size_t t = 0; t < cfg.rounds; ++t) {
    RefineResult r = refine_round(emb, split, model.params, cfg.context_size);
    out.trace.rounds.push_back({split.context, split.query, std::move(r.query_scores), {}});
    split = std::move(r.next);
  }
  out.scores = impute_and_average(out.trace, n);
  return out;
}

inline ZeroShotOutput score_zero_shot(const Graph& g, const Model& model, const ZeroShotConfig& cfg) {
  const PreparedGraph p = prepare(g.without_labels(), model.config);
  return score_zero_shot(p, embed(p, model), model, cfg);
}

inline nlohmann::json trace_to_json(const ZeroShotTrace& trace, const ScoreVector& final_scores) {
  nlohmann::json rounds = nlohmann::json::array();
  for (std::size_t t = 0; t < trace.rounds.size(); ++t) {
    const auto& r = trace.rounds[t];
    rounds.push_back({{"round", t + 1}, {"context", r.context}, {"query_scores", r.query_scores}, {"imputed", r.imputed}});
  }
  return {{"init_strategy", trace.init_strategy}, {"rounds", rounds}, {"final", final_scores.values}};
}

}  // namespace gad
