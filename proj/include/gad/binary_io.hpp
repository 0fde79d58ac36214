#pragma once

// Little-endian primitive encoding shared by the graph and checkpoint formats.

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "gad/error.hpp"

namespace gad::io {

inline void write_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes, 8);
}

inline void write_u32(std::ostream& out, std::uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes, 4);
}

inline void write_u8(std::ostream& out, std::uint8_t v) { out.put(static_cast<char>(v)); }

inline void write_f64(std::ostream& out, double v) { write_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline void write_string(std::ostream& out, const std::string& s) {
  write_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline void read_exact(std::istream& in, char* dst, std::size_t count, const char* what) {
  in.read(dst, static_cast<std::streamsize>(count));
  if (static_cast<std::size_t>(in.gcount()) != count) {
    throw Error(ErrorCode::MalformedHeader, std::string("truncated file while reading ") + what);
  }
}

inline std::uint64_t read_u64(std::istream& in, const char* what) {
  unsigned char bytes[8];
  read_exact(in, reinterpret_cast<char*>(bytes), 8, what);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

inline std::uint32_t read_u32(std::istream& in, const char* what) {
  unsigned char bytes[4];
  read_exact(in, reinterpret_cast<char*>(bytes), 4, what);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  return v;
}

inline std::uint8_t read_u8(std::istream& in, const char* what) {
  char c;
  read_exact(in, &c, 1, what);
  return static_cast<std::uint8_t>(c);
}

inline double read_f64(std::istream& in, const char* what) { return std::bit_cast<double>(read_u64(in, what)); }

inline std::string read_string(std::istream& in, const char* what, std::uint64_t max_len = 1u << 20) {
  const std::uint64_t len = read_u64(in, what);
  if (len > max_len) throw Error(ErrorCode::MalformedHeader, std::string("implausible length for ") + what);
  std::string s(len, '\0');
  read_exact(in, s.data(), len, what);
  return s;
}

}  // namespace gad::io
