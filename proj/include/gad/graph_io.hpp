#pragma once

// Canonical on-disk graph format ("GADG", version 1, little-endian):
//
//   magic "GADG" | version u32 | n u64 | m u64 | d u64 | has_labels u8
//   row offsets (n+1) x u64 | column indices (offsets[n]) x u64
//   features n*d x f64, row-major | labels n x u8 (if has_labels)
//   name length u64 | name bytes (UTF-8)
//
// Writers always emit the canonical symmetric CSR (offsets[n] == 2m). Readers
// accept any CSR and rebuild it through Graph::from_edges, so asymmetric or
// duplicated entries are repaired on load.

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "gad/binary_io.hpp"
#include "gad/graph.hpp"

namespace gad {

inline constexpr char kGraphMagic[4] = {'G', 'A', 'D', 'G'};
inline constexpr std::uint32_t kGraphVersion = 1;

inline Graph read_graph(std::istream& in) {
  char magic[4];
  io::read_exact(in, magic, 4, "magic");
  if (!std::equal(magic, magic + 4, kGraphMagic)) throw Error(ErrorCode::MalformedHeader, "bad magic, expected GADG");
  const auto version = io::read_u32(in, "version");
  if (version != kGraphVersion) {
    throw Error(ErrorCode::MalformedHeader, "unsupported version " + std::to_string(version));
  }
  const auto n = io::read_u64(in, "n");
  io::read_u64(in, "m");  // recomputed from the CSR
  const auto d = io::read_u64(in, "d");
  const auto has_labels = io::read_u8(in, "has_labels");
  if (has_labels > 1) throw Error(ErrorCode::MalformedHeader, "has_labels must be 0 or 1");
  constexpr std::uint64_t kLimit = std::uint64_t{1} << 40;
  if (n > kLimit || d > kLimit || (n && d > kLimit / n)) throw Error(ErrorCode::MalformedHeader, "implausible sizes");

  std::vector<std::uint64_t> offsets(n + 1);
  for (auto& o : offsets) o = io::read_u64(in, "row offsets");
  if (offsets[0] != 0) throw Error(ErrorCode::MalformedHeader, "row offsets must start at 0");
  for (std::size_t i = 0; i < n; ++i) {
    if (offsets[i + 1] < offsets[i]) throw Error(ErrorCode::MalformedHeader, "row offsets not monotone");
  }
  if (offsets[n] > kLimit) throw Error(ErrorCode::MalformedHeader, "implausible edge count");

  std::vector<Edge> edges;
  edges.reserve(offsets[n]);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::uint64_t p = offsets[i]; p < offsets[i + 1]; ++p) {
      const auto j = io::read_u64(in, "column indices");
      if (j >= n) throw Error(ErrorCode::IndexOutOfRange, "column index " + std::to_string(j), i);
      edges.emplace_back(i, j);
    }
  }

  Matrix features(n, d);
  for (double& v : features.data()) v = io::read_f64(in, "features");
  std::optional<std::vector<std::uint8_t>> labels;
  if (has_labels) {
    labels.emplace(n);
    for (auto& y : *labels) y = io::read_u8(in, "labels");
  }
  std::string name = io::read_string(in, "name");
  return Graph::from_edges(n, edges, std::move(features), std::move(labels), std::move(name));
}

inline void write_graph(std::ostream& out, const Graph& g) {
  out.write(kGraphMagic, 4);
  io::write_u32(out, kGraphVersion);
  io::write_u64(out, g.node_count());
  io::write_u64(out, g.edge_count());
  io::write_u64(out, g.feature_dim());
  io::write_u8(out, g.has_labels() ? 1 : 0);
  for (auto o : g.row_offsets()) io::write_u64(out, o);
  for (auto j : g.column_indices()) io::write_u64(out, j);
  for (double v : g.features().data()) io::write_f64(out, v);
  if (g.has_labels()) {
    for (auto y : g.labels()) io::write_u8(out, y);
  }
  io::write_string(out, g.name());
}

inline nlohmann::json graph_meta(const Graph& g) {
  return {{"name", g.name()},
          {"n", g.node_count()},
          {"m", g.edge_count()},
          {"d", g.feature_dim()},
          {"anomaly_count", g.anomaly_count()}};
}

inline std::filesystem::path meta_path_for(const std::filesystem::path& graph_path) {
  auto p = graph_path;
  p.replace_extension(".meta.json");
  return p;
}

inline Graph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return read_graph(in);
}

/// Writes the graph and its `.meta.json` sidecar.
inline void save_graph(const std::filesystem::path& path, const Graph& g) {
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    write_graph(out, g);
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
  }
  std::ofstream meta(meta_path_for(path), std::ios::trunc);
  meta << graph_meta(g).dump(2) << '\n';
}

}  // namespace gad
