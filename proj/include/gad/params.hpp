#pragma once

// Flat parameter storage with named matrix blocks, plus the "GADP" binary
// encoding:
//
//   magic "GADP" | version u32 | block count u32
//   per block: name (u64 length + bytes) | rows u64 | cols u64
//   payload: all values as f64, block order, row-major
//   trailer: metadata JSON (u64 length + bytes), may be empty

#include <algorithm>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gad/binary_io.hpp"
#include "gad/matrix.hpp"

namespace gad {

struct ParamBlock {
  std::string name;
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const noexcept { return rows * cols; }
  friend bool operator==(const ParamBlock&, const ParamBlock&) = default;
};

class ParamVector {
 public:
  ParamVector() = default;

  /// Appends a zero-initialised block; returns its index.
  std::size_t add_block(std::string name, std::size_t rows, std::size_t cols) {
    if (find(name)) throw Error(ErrorCode::Contract, "duplicate parameter block '" + name + "'");
    blocks_.push_back({std::move(name), values_.size(), rows, cols});
    values_.resize(values_.size() + rows * cols, 0.0);
    return blocks_.size() - 1;
  }

  std::size_t size() const noexcept { return values_.size(); }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<ParamBlock>& blocks() const noexcept { return blocks_; }

  const ParamBlock* find(std::string_view name) const {
    auto it = std::find_if(blocks_.begin(), blocks_.end(), [&](const ParamBlock& b) { return b.name == name; });
    return it == blocks_.end() ? nullptr : &*it;
  }

  const ParamBlock& block(std::string_view name) const {
    if (const ParamBlock* b = find(name)) return *b;
    throw Error(ErrorCode::Contract, "unknown parameter block '" + std::string(name) + "'");
  }

  std::span<double> slice(const ParamBlock& b) { return {values_.data() + b.offset, b.size()}; }
  std::span<const double> slice(const ParamBlock& b) const { return {values_.data() + b.offset, b.size()}; }

  /// Copies a block out as a matrix.
  Matrix unpack(std::string_view name) const {
    const ParamBlock& b = block(name);
    auto s = slice(b);
    return Matrix(b.rows, b.cols, std::vector<double>(s.begin(), s.end()));
  }

  void pack(std::string_view name, const Matrix& m) {
    const ParamBlock& b = block(name);
    if (m.rows() != b.rows || m.cols() != b.cols) {
      throw Error(ErrorCode::DimensionMismatch, "pack: shape mismatch for '" + b.name + "'");
    }
    std::copy(m.data().begin(), m.data().end(), slice(b).begin());
  }

  bool same_layout(const ParamVector& o) const { return blocks_ == o.blocks_; }

  /// Zero vector with the same layout, used for gradients and optimizer state.
  ParamVector zeros_like() const {
    ParamVector z = *this;
    std::fill(z.values_.begin(), z.values_.end(), 0.0);
    return z;
  }

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::vector<ParamBlock> blocks_;
  std::vector<double> values_;
};

inline constexpr char kParamMagic[4] = {'G', 'A', 'D', 'P'};
inline constexpr std::uint32_t kParamVersion = 1;

inline void write_params(std::ostream& out, const ParamVector& p, const std::string& metadata = {}) {
  out.write(kParamMagic, 4);
  io::write_u32(out, kParamVersion);
  io::write_u32(out, static_cast<std::uint32_t>(p.blocks().size()));
  for (const auto& b : p.blocks()) {
    io::write_string(out, b.name);
    io::write_u64(out, b.rows);
    io::write_u64(out, b.cols);
  }
  for (double v : p.values()) io::write_f64(out, v);
  io::write_string(out, metadata);
}

/// Reads a parameter vector; the metadata trailer is returned through `metadata`.
inline ParamVector read_params(std::istream& in, std::string* metadata = nullptr) {
  char magic[4];
  io::read_exact(in, magic, 4, "magic");
  if (!std::equal(magic, magic + 4, kParamMagic)) throw Error(ErrorCode::MalformedHeader, "bad magic, expected GADP");
  const auto version = io::read_u32(in, "version");
  if (version != kParamVersion) throw Error(ErrorCode::MalformedHeader, "unsupported checkpoint version");
  const auto count = io::read_u32(in, "block count");
  ParamVector p;
  for (std::uint32_t i = 0; i < count; ++i) {
    auto name = io::read_string(in, "block name", 4096);
    const auto rows = io::read_u64(in, "block rows");
    const auto cols = io::read_u64(in, "block cols");
    if (rows > (1u << 24) || cols > (1u << 24)) throw Error(ErrorCode::MalformedHeader, "implausible block shape");
    p.add_block(std::move(name), rows, cols);
  }
  for (double& v : p.values()) v = io::read_f64(in, "payload");
  std::string meta = io::read_string(in, "metadata", std::uint64_t{1} << 32);
  if (metadata) *metadata = std::move(meta);
  return p;
}

}  // namespace gad
