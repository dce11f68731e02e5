#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "solarcast/error.hpp"
#include "solarcast/linear.hpp"
#include "solarcast/matrix.hpp"

namespace solarcast {

enum class KnnWeighting { Uniform, InverseDistance };

struct KnnParams {
  std::size_t k = 5;
  KnnWeighting weighting = KnnWeighting::Uniform;
  friend bool operator==(const KnnParams&, const KnnParams&) = default;
};

struct KnnModel {
  Matrix X;
  std::vector<double> y;
  std::size_t k = 5;
  KnnWeighting weighting = KnnWeighting::Uniform;

  [[nodiscard]] std::size_t input_width() const noexcept { return X.cols(); }

  /// The k nearest training rows by Euclidean distance, nearest first; equal
  /// distances are ordered by training-row index. Returns squared distances.
  [[nodiscard]] std::vector<std::pair<double, std::size_t>> neighbors(std::span<const double> x) const {
    std::vector<std::pair<double, std::size_t>> dist(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) {
      auto r = X.row(i);
      double s = 0.0;
      for (std::size_t j = 0; j < r.size(); ++j) {
        const double diff = r[j] - x[j];
        s += diff * diff;
      }
      dist[i] = {s, i};
    }
    const auto kk = std::min(k, dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
    dist.resize(kk);
    return dist;
  }

  [[nodiscard]] double predict_row(std::span<const double> x) const {
    const auto nb = neighbors(x);
    if (weighting == KnnWeighting::Uniform) {
      double acc = 0.0;
      for (const auto& [d2, i] : nb) acc += y[i];
      return acc / static_cast<double>(nb.size());
    }
    // Exact matches take all the weight.
    if (nb.front().first == 0.0) {
      double acc = 0.0;
      std::size_t count = 0;
      for (const auto& [d2, i] : nb) {
        if (d2 != 0.0) break;
        acc += y[i];
        ++count;
      }
      return acc / static_cast<double>(count);
    }
    double num = 0.0, den = 0.0;
    for (const auto& [d2, i] : nb) {
      const double w = 1.0 / std::sqrt(d2);
      num += w * y[i];
      den += w;
    }
    return num / den;
  }

  friend bool operator==(const KnnModel&, const KnnModel&) = default;
};

inline KnnModel fit_knn(const Matrix& X, std::span<const double> y, const KnnParams& params = {}) {
  if (X.rows() != y.size()) throw Error(Errc::LengthMismatch, "X rows differ from target length");
  detail::require_finite(X, y);
  if (params.k < 1 || params.k > X.rows()) {
    throw Error(Errc::InvalidHyperparameter,
                "k=" + std::to_string(params.k) + " must lie in [1, " + std::to_string(X.rows()) + "]");
  }
  return {X, {y.begin(), y.end()}, params.k, params.weighting};
}

/// Single-query form of the fitted model's prediction rule.
inline double knn_predict(const KnnModel& model, std::span<const double> x) {
  if (x.size() != model.input_width()) throw Error(Errc::DimensionMismatch, "knn query width");
  return model.predict_row(x);
}

}  // namespace solarcast
