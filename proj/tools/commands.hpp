#pragma once

#include <cstdint>
#include <iosfwd>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace gad::cli {

// Stable exit codes for scripting.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

/// Runs one `gad` invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gad::cli

namespace gad {
struct Model;
}

namespace gad::cli {

/// Rows {n, m, phase, seconds}, one per phase per graph size.
nlohmann::json run_bench(const Model& model, std::size_t nodes, const std::vector<std::size_t>& edge_counts,
                         std::size_t dim, std::size_t repeats, std::size_t context, std::uint64_t seed);

}  // namespace gad::cli
