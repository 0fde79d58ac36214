#pragma once

// Synthetic anomaly injection, the clique / feature-swap protocol:
//  * structural: `clique_count` disjoint groups of `clique_size` random nodes
//    become fully connected;
//  * attribute: each of `attribute_count` random nodes takes the feature row
//    of the farthest (Euclidean) of `candidate_pool` sampled candidates.
// Injected node sets are disjoint, and candidates never include the target or
// any injected node, so every donor row is an original row.

#include <cstdint>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>
#include <vector>

#include "gad/graph.hpp"
#include "gad/rng.hpp"

namespace gad {

struct InjectionSpec {
  std::size_t clique_size = 15;
  std::size_t clique_count = 0;
  std::size_t attribute_count = 0;
  std::size_t candidate_pool = 50;
  std::uint64_t seed = 0;

  std::size_t anomaly_count() const { return clique_size * clique_count + attribute_count; }

  /// Defaults of the cited protocol: cliques of 15, anomalies ~= `fraction`
  /// of n split evenly between structural and attribute anomalies.
  static InjectionSpec for_fraction(std::size_t n, double fraction, std::uint64_t seed, std::size_t clique_size = 15) {
    InjectionSpec spec;
    spec.clique_size = clique_size;
    const double target = fraction * static_cast<double>(n) / (2.0 * static_cast<double>(clique_size));
    spec.clique_count = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(target)));
    spec.attribute_count = spec.clique_count * clique_size;
    spec.seed = seed;
    return spec;
  }
};

inline void to_json(nlohmann::json& j, const InjectionSpec& s) {
  j = {{"clique_size", s.clique_size},
       {"clique_count", s.clique_count},
       {"attribute_count", s.attribute_count},
       {"candidate_pool", s.candidate_pool},
       {"seed", s.seed}};
}

inline void from_json(const nlohmann::json& j, InjectionSpec& s) {
  for (const auto& [key, _] : j.items()) {
    if (key != "clique_size" && key != "clique_count" && key != "attribute_count" && key != "candidate_pool" &&
        key != "seed") {
      throw Error(ErrorCode::Config, "unknown injection key '" + key + "'");
    }
  }
  s.clique_size = j.value("clique_size", s.clique_size);
  s.clique_count = j.value("clique_count", s.clique_count);
  s.attribute_count = j.value("attribute_count", s.attribute_count);
  s.candidate_pool = j.value("candidate_pool", s.candidate_pool);
  s.seed = j.value("seed", s.seed);
}

/// Where the injection put things; returned alongside the graph for tests and logs.
struct InjectionRecord {
  std::vector<std::vector<NodeId>> cliques;
  std::vector<NodeId> attribute_targets;
  std::vector<NodeId> donors;  // donors[i] gave its row to attribute_targets[i]
  std::vector<std::vector<NodeId>> candidates;
};

inline Graph inject(const Graph& g, const InjectionSpec& spec, InjectionRecord* record = nullptr) {
  const std::size_t n = g.node_count();
  if (spec.clique_count > 0 && spec.clique_size < 2) throw Error(ErrorCode::InfeasibleSpec, "clique_size must be >= 2");
  if (spec.attribute_count > 0 && spec.candidate_pool < 2) {
    throw Error(ErrorCode::InfeasibleSpec, "candidate_pool must be >= 2");
  }
  const std::size_t injected = spec.anomaly_count();
  if (injected > n) {
    throw Error(ErrorCode::InfeasibleSpec, std::to_string(injected) + " injected nodes exceed n=" + std::to_string(n));
  }
  if (spec.attribute_count > 0 && injected == n) {
    throw Error(ErrorCode::InfeasibleSpec, "no candidate nodes left for attribute anomalies");
  }

  Rng rng(spec.seed);
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  auto chosen = rng.sample(std::span<const NodeId>(order), injected);

  std::vector<std::uint8_t> labels(n, 0);
  std::vector<char> is_injected(n, 0);
  for (NodeId v : chosen) {
    labels[v] = 1;
    is_injected[v] = 1;
  }

  std::vector<Edge> edges = g.edges();
  InjectionRecord rec;
  for (std::size_t c = 0; c < spec.clique_count; ++c) {
    std::vector<NodeId> members(chosen.begin() + static_cast<std::ptrdiff_t>(c * spec.clique_size),
                                chosen.begin() + static_cast<std::ptrdiff_t>((c + 1) * spec.clique_size));
    for (std::size_t i = 0; i < members.size(); ++i)
      for (std::size_t j = i + 1; j < members.size(); ++j) edges.emplace_back(members[i], members[j]);
    rec.cliques.push_back(std::move(members));
  }

  Matrix features = g.features();
  if (spec.attribute_count > 0) {
    std::vector<NodeId> pool;
    pool.reserve(n - injected);
    for (NodeId v = 0; v < n; ++v)
      if (!is_injected[v]) pool.push_back(v);
    const std::size_t k = std::min(spec.candidate_pool, pool.size());
    const std::size_t first = spec.clique_count * spec.clique_size;
    for (std::size_t a = 0; a < spec.attribute_count; ++a) {
      const NodeId target = chosen[first + a];
      auto candidates = rng.sample(std::span<const NodeId>(pool), k);
      NodeId best = candidates.front();
      double best_dist = -1.0;
      for (NodeId c : candidates) {
        const double dist = squared_distance(g.features().row(target), g.features().row(c));
        if (dist > best_dist || (dist == best_dist && c < best)) {
          best_dist = dist;
          best = c;
        }
      }
      auto src = g.features().row(best);
      std::copy(src.begin(), src.end(), features.row(target).begin());
      rec.attribute_targets.push_back(target);
      rec.donors.push_back(best);
      rec.candidates.push_back(std::move(candidates));
    }
  }

  if (record) *record = std::move(rec);
  return Graph::from_edges(n, edges, std::move(features), std::move(labels), g.name());
}

}  // namespace gad
