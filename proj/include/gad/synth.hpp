#pragma once

// Synthetic attributed graphs: stochastic block model structure, Gaussian
// mixture features (one component per block), then clique / feature-swap
// anomaly injection. Domains differ in raw feature width and block count so
// that training and test collections need feature alignment to share a model.

#include <cstdint>
#include <nlohmann/json.hpp>
#include <set>
#include <string>
#include <vector>

#include "gad/inject.hpp"

namespace gad {

struct DomainSpec {
  std::string name = "domain";
  std::size_t nodes = 1000;
  std::size_t raw_dim = 32;
  std::size_t clusters = 4;
  double p_intra = 0.02;
  double p_inter = 0.0005;
  double separation = 3.0;  // std-dev of cluster centres per dimension
  double noise = 1.0;       // std-dev of node features around their centre
  InjectionSpec injection;
  std::uint64_t seed = 0;

  void validate() const {
    require(nodes >= 2, ErrorCode::InfeasibleSpec, "domain needs at least 2 nodes");
    require(raw_dim >= 1, ErrorCode::InfeasibleSpec, "domain needs raw_dim >= 1");
    require(clusters >= 1 && clusters <= nodes, ErrorCode::InfeasibleSpec, "cluster count out of range");
    require(p_intra >= 0.0 && p_intra <= 1.0 && p_inter >= 0.0 && p_inter <= 1.0, ErrorCode::InfeasibleSpec,
            "edge probabilities must lie in [0, 1]");
    require(separation >= 0.0 && noise >= 0.0, ErrorCode::InfeasibleSpec, "negative feature scale");
  }
};

inline void to_json(nlohmann::json& j, const DomainSpec& s) {
  j = {{"name", s.name},          {"nodes", s.nodes},     {"raw_dim", s.raw_dim},       {"clusters", s.clusters},
       {"p_intra", s.p_intra},    {"p_inter", s.p_inter}, {"separation", s.separation}, {"noise", s.noise},
       {"injection", s.injection}, {"seed", s.seed}};
}

/// Block assignment used by generate(): balanced, then shuffled.
inline std::vector<std::size_t> block_assignment(const DomainSpec& spec, Rng& rng) {
  std::vector<std::size_t> block(spec.nodes);
  for (std::size_t i = 0; i < spec.nodes; ++i) block[i] = i % spec.clusters;
  rng.shuffle(std::span<std::size_t>(block));
  return block;
}

/// Clean SBM graph with all-normal labels (before injection).
inline Graph generate_clean(const DomainSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const auto block = block_assignment(spec, rng);

  Matrix centres(spec.clusters, spec.raw_dim);
  for (double& v : centres.data()) v = rng.normal(0.0, spec.separation);
  Matrix features(spec.nodes, spec.raw_dim);
  for (std::size_t i = 0; i < spec.nodes; ++i)
    for (std::size_t k = 0; k < spec.raw_dim; ++k) features(i, k) = centres(block[i], k) + rng.normal(0.0, spec.noise);

  std::vector<Edge> edges;
  for (std::size_t i = 0; i < spec.nodes; ++i)
    for (std::size_t j = i + 1; j < spec.nodes; ++j)
      if (rng.bernoulli(block[i] == block[j] ? spec.p_intra : spec.p_inter)) edges.emplace_back(i, j);

  return Graph::from_edges(spec.nodes, edges, std::move(features), std::vector<std::uint8_t>(spec.nodes, 0), spec.name);
}

inline Graph generate(const DomainSpec& spec) { return inject(generate_clean(spec), spec.injection); }

/// Exactly `edges` distinct random edges over `nodes` nodes with N(0,1)
/// features; used for scaling measurements.
inline Graph random_graph(std::size_t nodes, std::size_t edges, std::size_t dim, std::uint64_t seed) {
  require(nodes >= 2, ErrorCode::InfeasibleSpec, "random_graph needs 2 nodes");
  require(edges <= nodes * (nodes - 1) / 2, ErrorCode::InfeasibleSpec, "too many edges requested");
  Rng rng(seed);
  std::set<std::pair<NodeId, NodeId>> seen;
  std::vector<Edge> list;
  list.reserve(edges);
  while (list.size() < edges) {
    NodeId u = rng.below(nodes), v = rng.below(nodes);
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    if (seen.emplace(u, v).second) list.emplace_back(u, v);
  }
  Matrix features(nodes, dim);
  for (double& x : features.data()) x = rng.normal();
  return Graph::from_edges(nodes, list, std::move(features), std::nullopt, "random");
}

struct BenchmarkSuite {
  std::vector<DomainSpec> train;
  std::vector<DomainSpec> test;
};

/// The fixed acceptance collection: three training domains and two unseen
/// test domains, each with a distinct raw width. Training and test seeds come
/// from disjoint streams of `seed`.
inline BenchmarkSuite acceptance_suite(std::uint64_t seed, std::size_t nodes = 1000) {
  struct Shape {
    const char* name;
    std::size_t dim;
    std::size_t clusters;
    double p_intra;
    double separation;
  };
  const Shape train_shapes[] = {{"train_a", 32, 3, 0.015, 2.5}, {"train_b", 48, 5, 0.030, 3.0}, {"train_c", 96, 4, 0.020, 2.0}};
  const Shape test_shapes[] = {{"test_a", 24, 6, 0.035, 3.0}, {"test_b", 64, 2, 0.010, 2.5}};

  auto make = [&](const Shape& s, std::uint64_t stream) {
    DomainSpec d;
    d.name = s.name;
    d.nodes = nodes;
    d.raw_dim = s.dim;
    d.clusters = s.clusters;
    d.p_intra = s.p_intra * 1000.0 / static_cast<double>(nodes);
    d.p_inter = 0.0005 * 1000.0 / static_cast<double>(nodes);
    d.separation = s.separation;
    d.seed = derive_seed(seed, stream);
    d.injection = InjectionSpec::for_fraction(nodes, 0.05, derive_seed(seed, stream + 500));
    return d;
  };
  BenchmarkSuite suite;
  for (std::size_t i = 0; i < 3; ++i) suite.train.push_back(make(train_shapes[i], 1000 + i));
  for (std::size_t i = 0; i < 2; ++i) suite.test.push_back(make(test_shapes[i], 2000 + i));
  return suite;
}

}  // namespace gad
