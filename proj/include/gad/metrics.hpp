#pragma once

// Ranking metrics for anomaly scores (label 1 = anomaly, higher score = more
// anomalous).
//
// AUROC is the Mann-Whitney statistic: the fraction of (anomaly, normal) pairs
// ranked correctly, ties counting one half.
//
// AUPRC is step-wise average precision over the distinct score thresholds:
//   AP = sum_t (R_t - R_{t-1}) * P_t
// where t walks the distinct scores from high to low and P_t, R_t are the
// precision and recall of "score >= t". A block of tied scores therefore adds
// its whole recall gain at the precision reached at the end of the block.
// Without ties this is the mean of precision@rank over the anomalies.

#include <algorithm>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <numeric>
#include <span>
#include <vector>

#include "gad/error.hpp"

namespace gad {

namespace detail {

inline std::vector<std::size_t> order_by_score_desc(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return idx;
}

inline void check_inputs(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw Error(ErrorCode::DimensionMismatch, "scores and labels differ in length");
}

}  // namespace detail

inline double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  detail::check_inputs(scores, labels);
  const auto idx = detail::order_by_score_desc(scores);
  double positives = 0.0, negatives = 0.0, correct = 0.0;
  // Walk tied blocks from the top; each anomaly beats every normal below its block.
  std::size_t i = 0;
  double negatives_above = 0.0;
  while (i < idx.size()) {
    std::size_t j = i;
    double block_pos = 0.0, block_neg = 0.0;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      (labels[idx[j]] ? block_pos : block_neg) += 1.0;
      ++j;
    }
    positives += block_pos;
    negatives += block_neg;
    // anomalies in this block are beaten by all normals above, tie with block normals
    correct -= block_pos * negatives_above;
    correct -= 0.5 * block_pos * block_neg;
    negatives_above += block_neg;
    i = j;
  }
  if (positives == 0.0 || negatives == 0.0) {
    throw Error(ErrorCode::SingleClass, "AUROC needs both anomalies and normals");
  }
  correct += positives * negatives;
  return correct / (positives * negatives);
}

inline double auprc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  detail::check_inputs(scores, labels);
  const auto idx = detail::order_by_score_desc(scores);
  const double positives =
      static_cast<double>(std::count_if(labels.begin(), labels.end(), [](std::uint8_t y) { return y != 0; }));
  if (positives == 0.0) throw Error(ErrorCode::SingleClass, "AUPRC needs at least one anomaly");
  double tp = 0.0, seen = 0.0, ap = 0.0;
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    double block_pos = 0.0;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      if (labels[idx[j]]) block_pos += 1.0;
      seen += 1.0;
      ++j;
    }
    tp += block_pos;
    if (block_pos > 0.0) ap += (block_pos / positives) * (tp / seen);
    i = j;
  }
  return ap;
}

struct MetricReport {
  double auroc = 0.0;
  double auprc = 0.0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

inline MetricReport evaluate(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  MetricReport r;
  r.auroc = gad::auroc(scores, labels);
  r.auprc = gad::auprc(scores, labels);
  r.positives = static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](auto y) { return y != 0; }));
  r.negatives = labels.size() - r.positives;
  return r;
}

inline void to_json(nlohmann::json& j, const MetricReport& r) {
  j = {{"auroc", r.auroc}, {"auprc", r.auprc}, {"positives", r.positives}, {"negatives", r.negatives}};
}

}  // namespace gad
