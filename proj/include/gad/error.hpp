#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace gad {

enum class ErrorCode {
  // config / contract violations
  Config,
  Contract,
  DimensionMismatch,
  InfeasibleSpec,
  InsufficientNormals,
  InsufficientAnomalies,
  // data problems
  Io,
  MalformedHeader,
  NonFiniteFeature,
  IndexOutOfRange,
  NoEdges,
  SingleClass,
  // numeric failures
  NonFinite,
  DegenerateEmbedding,
};

enum class ErrorCategory { Config, Data, Numeric };

inline ErrorCategory category_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::Config:
    case ErrorCode::Contract:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::InfeasibleSpec:
    case ErrorCode::InsufficientNormals:
    case ErrorCode::InsufficientAnomalies:
      return ErrorCategory::Config;
    case ErrorCode::Io:
    case ErrorCode::MalformedHeader:
    case ErrorCode::NonFiniteFeature:
    case ErrorCode::IndexOutOfRange:
    case ErrorCode::NoEdges:
    case ErrorCode::SingleClass:
      return ErrorCategory::Data;
    case ErrorCode::NonFinite:
    case ErrorCode::DegenerateEmbedding:
      return ErrorCategory::Numeric;
  }
  return ErrorCategory::Data;
}

inline const char* code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Config: return "Config";
    case ErrorCode::Contract: return "Contract";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InfeasibleSpec: return "InfeasibleSpec";
    case ErrorCode::InsufficientNormals: return "InsufficientNormals";
    case ErrorCode::InsufficientAnomalies: return "InsufficientAnomalies";
    case ErrorCode::Io: return "Io";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::NonFiniteFeature: return "NonFiniteFeature";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NoEdges: return "NoEdges";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DegenerateEmbedding: return "DegenerateEmbedding";
  }
  return "Unknown";
}

/// Every failure in the library surfaces as a gad::Error. `row()` carries the
/// offending node/row index when one exists (e.g. NonFiniteFeature{row}).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::optional<std::size_t> row = std::nullopt)
      : std::runtime_error(std::string(code_name(code)) + ": " + message), code_(code), row_(row) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }
  std::optional<std::size_t> row() const noexcept { return row_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> row_;
};

inline void require(bool ok, ErrorCode code, const std::string& message) {
  if (!ok) throw Error(code, message);
}

}  // namespace gad
