#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace gad {

/// Worker cap: GAD_THREADS if set and positive, else hardware concurrency.
inline std::size_t thread_count() {
  if (const char* env = std::getenv("GAD_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (...) {
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Runs fn(begin, end) over contiguous row chunks. Each row is handled by
/// exactly one call, so row-local work gives thread-count-independent output.
template <class Fn>
void parallel_rows(std::size_t rows, std::size_t work_per_row, Fn&& fn) {
  constexpr std::size_t kMinWork = 1 << 16;
  std::size_t workers = std::min(thread_count(), rows);
  if (workers > 1 && rows * std::max<std::size_t>(work_per_row, 1) < kMinWork * workers) {
    workers = std::max<std::size_t>(1, rows * std::max<std::size_t>(work_per_row, 1) / kMinWork);
  }
  if (workers <= 1) {
    fn(std::size_t{0}, rows);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (rows + workers - 1) / workers;
  for (std::size_t begin = 0; begin < rows; begin += chunk) {
    const std::size_t end = std::min(rows, begin + chunk);
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
}

}  // namespace gad
