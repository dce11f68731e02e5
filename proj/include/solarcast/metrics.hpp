#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "solarcast/error.hpp"
#include "solarcast/preprocess.hpp"

namespace solarcast {

namespace detail {
inline void require_pairs(std::span<const double> a, std::span<const double> p) {
  if (a.size() != p.size()) throw Error(Errc::LengthMismatch, "actual and predicted differ in length");
  if (a.empty()) throw Error(Errc::EmptyInput, "no rows to evaluate");
}
}  // namespace detail

inline double mae(std::span<const double> actual, std::span<const double> predicted) {
  detail::require_pairs(actual, predicted);
  double acc = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) acc += std::abs(actual[i] - predicted[i]);
  return acc / static_cast<double>(actual.size());
}

inline double rmse(std::span<const double> actual, std::span<const double> predicted) {
  detail::require_pairs(actual, predicted);
  double acc = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double e = actual[i] - predicted[i];
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(actual.size()));
}

/// 1 - SSE/SST; a constant target gives 1 for an exact fit and 0 otherwise.
inline double r_squared(std::span<const double> actual, std::span<const double> predicted) {
  detail::require_pairs(actual, predicted);
  const double mean = std::accumulate(actual.begin(), actual.end(), 0.0) / static_cast<double>(actual.size());
  double sse = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    sse += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
    sst += (actual[i] - mean) * (actual[i] - mean);
  }
  if (sst == 0.0) return sse == 0.0 ? 1.0 : 0.0;
  return 1.0 - sse / sst;
}

/// Mann-Whitney AUC from rank sums; tied scores share their average rank,
/// which credits positive/negative ties with 1/2.
inline double roc_auc(std::span<const std::uint8_t> labels, std::span<const double> scores) {
  if (labels.size() != scores.size()) throw Error(Errc::LengthMismatch, "labels and scores differ in length");
  const std::size_t n = labels.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    // ranks i+1 .. j share their mean
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]]) {
        pos_rank_sum += avg_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw Error(Errc::SingleClass, "roc_auc needs both classes");
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  const double u = pos_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * nn);
}

struct ClassificationScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Labels both sequences as value > threshold_kw.
inline ClassificationScores classification_at_threshold(std::span<const double> actual,
                                                        std::span<const double> predicted,
                                                        double threshold_kw) {
  detail::require_pairs(actual, predicted);
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const bool a = actual[i] > threshold_kw, p = predicted[i] > threshold_kw;
    tp += a && p;
    fp += !a && p;
    fn += a && !p;
  }
  ClassificationScores s;
  s.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  s.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

struct EvaluationReport {
  double mae = 0.0;
  double rmse = 0.0;
  double pearson_r = 0.0;
  double r_squared = 0.0;
  std::optional<double> auc;  // unset when the held-out rows hold a single class
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t n = 0;
  double threshold_kw = 0.0;
};

inline EvaluationReport evaluate(std::span<const double> actual, std::span<const double> predicted,
                                 double threshold_kw = 0.0) {
  detail::require_pairs(actual, predicted);
  EvaluationReport r;
  r.n = actual.size();
  r.threshold_kw = threshold_kw;
  r.mae = mae(actual, predicted);
  r.rmse = rmse(actual, predicted);
  r.pearson_r = actual.size() >= 2 ? pearson_r(actual, predicted) : 0.0;
  r.r_squared = r_squared(actual, predicted);
  std::vector<std::uint8_t> labels(actual.size());
  for (std::size_t i = 0; i < actual.size(); ++i) labels[i] = actual[i] > threshold_kw;
  const auto pos = std::count(labels.begin(), labels.end(), 1);
  if (pos > 0 && static_cast<std::size_t>(pos) < labels.size()) r.auc = roc_auc(labels, predicted);
  const auto c = classification_at_threshold(actual, predicted, threshold_kw);
  r.precision = c.precision;
  r.recall = c.recall;
  r.f1 = c.f1;
  return r;
}

struct ErrorRow {
  std::int64_t id = 0;
  double actual = 0.0;
  double predicted = 0.0;
  double error = 0.0;  // actual - predicted
};

using ErrorTable = std::vector<ErrorRow>;

inline ErrorTable error_table(std::span<const std::int64_t> ids, std::span<const double> actual,
                              std::span<const double> predicted) {
  if (ids.size() != actual.size() || actual.size() != predicted.size()) {
    throw Error(Errc::LengthMismatch, "error_table columns differ in length");
  }
  ErrorTable t;
  t.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) t.push_back({ids[i], actual[i], predicted[i], actual[i] - predicted[i]});
  return t;
}

}  // namespace solarcast
