#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "gad/matrix.hpp"
#include "gad/rng.hpp"

namespace gad {

struct KMeansOptions {
  std::size_t max_iters = 100;
  std::size_t restarts = 4;
  std::uint64_t seed = 0;
};

struct KMeansResult {
  Matrix centroids;                 // k x d
  std::vector<std::size_t> assignment;
  double inertia = 0.0;
  std::size_t iterations = 0;
  std::size_t empty_repairs = 0;    // empty clusters re-seeded from the farthest point
};

namespace detail {

inline std::size_t nearest_centroid(const Matrix& centroids, std::span<const double> point, double* dist_out) {
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d = squared_distance(point, centroids.row(c));
    if (d < best_dist) {
      best_dist = d;
      best = c;
    }
  }
  if (dist_out) *dist_out = best_dist;
  return best;
}

inline Matrix kmeans_plus_plus(const Matrix& x, std::size_t k, Rng& rng) {
  const std::size_t n = x.rows();
  Matrix centroids(k, x.cols());
  std::size_t first = rng.below(n);
  std::copy(x.row(first).begin(), x.row(first).end(), centroids.row(0).begin());
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) dist[i] = squared_distance(x.row(i), centroids.row(0));
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double d : dist) total += d;
    std::size_t pick = 0;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        target -= dist[i];
        if (target < 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.below(n);
    }
    std::copy(x.row(pick).begin(), x.row(pick).end(), centroids.row(c).begin());
    for (std::size_t i = 0; i < n; ++i) dist[i] = std::min(dist[i], squared_distance(x.row(i), centroids.row(c)));
  }
  return centroids;
}

inline KMeansResult lloyd(const Matrix& x, Matrix centroids, std::size_t max_iters) {
  const std::size_t n = x.rows();
  const std::size_t k = centroids.rows();
  KMeansResult r;
  r.assignment.assign(n, 0);
  std::vector<double> dist(n);
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    bool changed = iter == 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = nearest_centroid(centroids, x.row(i), &dist[i]);
      if (c != r.assignment[i]) changed = true;
      r.assignment[i] = c;
    }
    Matrix sums(k, x.cols());
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto s = sums.row(r.assignment[i]);
      auto p = x.row(i);
      for (std::size_t j = 0; j < s.size(); ++j) s[j] += p[j];
      ++counts[r.assignment[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // empty cluster: move it onto the point farthest from its centroid
        std::size_t far = 0;
        for (std::size_t i = 1; i < n; ++i)
          if (dist[i] > dist[far]) far = i;
        std::copy(x.row(far).begin(), x.row(far).end(), centroids.row(c).begin());
        dist[far] = 0.0;
        ++r.empty_repairs;
        changed = true;
        continue;
      }
      for (std::size_t j = 0; j < x.cols(); ++j) centroids(c, j) = sums(c, j) / static_cast<double>(counts[c]);
    }
    r.iterations = iter + 1;
    if (!changed) break;
  }
  r.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r.assignment[i] = nearest_centroid(centroids, x.row(i), &dist[i]);
    r.inertia += dist[i];
  }
  r.centroids = std::move(centroids);
  return r;
}

}  // namespace detail

/// Lloyd's k-means on squared Euclidean distance with k-means++ seeding; the
/// restart with the lowest inertia wins (earliest restart on ties).
inline KMeansResult kmeans(const Matrix& x, std::size_t k, const KMeansOptions& options = {}) {
  require(k >= 1 && k <= x.rows(), ErrorCode::Config, "k-means needs 1 <= k <= n");
  Rng rng(options.seed);
  KMeansResult best;
  bool have = false;
  for (std::size_t r = 0; r < std::max<std::size_t>(1, options.restarts); ++r) {
    KMeansResult run = detail::lloyd(x, detail::kmeans_plus_plus(x, k, rng), std::max<std::size_t>(1, options.max_iters));
    if (!have || run.inertia < best.inertia) {
      best = std::move(run);
      have = true;
    }
  }
  return best;
}

}  // namespace gad
