#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "solarcast/data.hpp"
#include "solarcast/error.hpp"
#include "solarcast/matrix.hpp"

namespace solarcast {

/// Linear interpolation between closest ranks at position q*(n-1).
inline double quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error(Errc::EmptyInput, "quantile of empty sequence");
  if (!(q >= 0.0 && q <= 1.0)) throw Error(Errc::InvalidConfig, "quantile q must lie in [0, 1]");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

/// Sample Pearson correlation; 0 when either side has zero variance.
inline double pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(Errc::LengthMismatch, "pearson_r inputs differ in length");
  if (x.size() < 2) throw Error(Errc::TooShort, "pearson_r needs at least 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

enum class OutlierPolicy { Drop, Clip };
enum class NormMethod { MinMax, ZScore };

struct Fence {
  double lower = 0.0;
  double upper = 0.0;
  friend bool operator==(const Fence&, const Fence&) = default;
};

struct OutlierFences {
  std::vector<Fence> features;
  std::optional<Fence> target;
  OutlierPolicy policy = OutlierPolicy::Drop;
  friend bool operator==(const OutlierFences&, const OutlierFences&) = default;
};

struct ImputationValues {
  std::vector<double> fill;
  friend bool operator==(const ImputationValues&, const ImputationValues&) = default;
};

/// minmax stores (min, max) per feature; zscore stores (mean, std).
struct NormalizationParams {
  NormMethod method = NormMethod::MinMax;
  std::vector<double> a;
  std::vector<double> b;

  [[nodiscard]] double forward(std::size_t j, double v) const {
    if (method == NormMethod::MinMax) {
      const double range = b[j] - a[j];
      return range > 0.0 ? (v - a[j]) / range : 0.0;
    }
    return b[j] > 0.0 ? (v - a[j]) / b[j] : 0.0;
  }

  [[nodiscard]] double inverse(std::size_t j, double v) const {
    if (method == NormMethod::MinMax) return a[j] + v * (b[j] - a[j]);
    return a[j] + v * b[j];
  }

  friend bool operator==(const NormalizationParams&, const NormalizationParams&) = default;
};

struct FeatureSelection {
  std::vector<double> scores;
  std::vector<std::size_t> kept;
  friend bool operator==(const FeatureSelection&, const FeatureSelection&) = default;
};

/// Keeps the top_m features by |score| (all when unset); ties go to the lower index.
inline FeatureSelection select_features(std::span<const double> scores,
                                        std::optional<std::size_t> top_m = std::nullopt) {
  const std::size_t d = scores.size();
  const std::size_t m = top_m.value_or(d);
  if (m < 1) throw Error(Errc::InvalidConfig, "top_m must be >= 1");
  if (m > d) {
    throw Error(Errc::TopMExceedsFeatureCount,
                "top_m=" + std::to_string(m) + " exceeds " + std::to_string(d) + " features");
  }
  FeatureSelection sel;
  sel.scores.assign(scores.begin(), scores.end());
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return std::abs(scores[i]) > std::abs(scores[j]);
  });
  sel.kept.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
  return sel;
}

struct PreprocessOptions {
  OutlierPolicy policy = OutlierPolicy::Drop;
  NormMethod norm = NormMethod::MinMax;
  double fence_multiplier = 1.5;
  bool fence_target = true;
  std::optional<std::size_t> top_m;
};

/// Preprocessing state learned from the training rows. Application order is
/// impute -> fence -> normalize -> select.
struct FittedPipeline {
  FeatureSchema schema;
  OutlierFences fences;
  ImputationValues impute;
  NormalizationParams norm;
  FeatureSelection select;
  std::size_t fitted_on = 0;

  [[nodiscard]] std::size_t output_width() const noexcept { return select.kept.size(); }

  [[nodiscard]] std::vector<std::string> output_names() const {
    std::vector<std::string> names;
    for (auto j : select.kept) names.push_back(schema.names[j]);
    return names;
  }

  friend bool operator==(const FittedPipeline&, const FittedPipeline&) = default;
};

struct TransformedRows {
  Matrix X;
  std::vector<double> y;
  std::vector<std::size_t> rows;  // dataset row index of each output row
};

namespace detail {

inline Fence tukey_fence(std::vector<double> values, double k) {
  std::sort(values.begin(), values.end());
  const double q1 = quantile(values, 0.25);
  const double q3 = quantile(values, 0.75);
  const double iqr = q3 - q1;
  return {q1 - k * iqr, q3 + k * iqr};
}

inline bool inside(const Fence& f, double v) { return v >= f.lower && v <= f.upper; }

}  // namespace detail

/// Imputes, fences, and clips one row in place. Returns false when the row is
/// rejected under the drop policy. Target may be missing (prediction inputs).
inline bool clean_row(const FittedPipeline& p, std::span<double> x, double& y) {
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (is_missing(x[j])) x[j] = p.impute.fill[j];
  }
  const bool drop = p.fences.policy == OutlierPolicy::Drop;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const auto& f = p.fences.features[j];
    if (detail::inside(f, x[j])) continue;
    if (drop) return false;
    x[j] = std::clamp(x[j], f.lower, f.upper);
  }
  if (p.fences.target && !is_missing(y) && !detail::inside(*p.fences.target, y)) {
    if (drop) return false;
    y = std::clamp(y, p.fences.target->lower, p.fences.target->upper);
  }
  return true;
}

inline FittedPipeline fit_pipeline(const LabeledDataset& ds, std::span<const std::size_t> train,
                                   const PreprocessOptions& opts = {}) {
  if (train.empty()) throw Error(Errc::EmptyInput, "no training rows");
  const std::size_t d = ds.features.cols();
  FittedPipeline p;
  p.schema = ds.schema;
  p.fitted_on = train.size();

  p.impute.fill.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    double sum = 0.0;
    std::size_t count = 0;
    for (auto i : train) {
      const double v = ds.features(i, j);
      if (!is_missing(v)) {
        sum += v;
        ++count;
      }
    }
    if (count == 0) {
      throw Error(Errc::AllMissingFeature, "feature " + ds.schema.names[j] + " has no training values");
    }
    p.impute.fill[j] = sum / static_cast<double>(count);
  }

  p.fences.policy = opts.policy;
  for (std::size_t j = 0; j < d; ++j) {
    std::vector<double> col;
    col.reserve(train.size());
    for (auto i : train) {
      const double v = ds.features(i, j);
      col.push_back(is_missing(v) ? p.impute.fill[j] : v);
    }
    p.fences.features.push_back(detail::tukey_fence(std::move(col), opts.fence_multiplier));
  }
  if (opts.fence_target) {
    std::vector<double> ys;
    for (auto i : train) {
      if (!is_missing(ds.target[i])) ys.push_back(ds.target[i]);
    }
    if (!ys.empty()) p.fences.target = detail::tukey_fence(std::move(ys), opts.fence_multiplier);
  }

  // Normalization and selection statistics come from the cleaned training rows.
  std::vector<std::vector<double>> cols(d);
  std::vector<double> ys;
  std::vector<double> buf(d);
  for (auto i : train) {
    auto src = ds.features.row(i);
    std::copy(src.begin(), src.end(), buf.begin());
    double y = ds.target[i];
    if (!clean_row(p, buf, y)) continue;
    for (std::size_t j = 0; j < d; ++j) cols[j].push_back(buf[j]);
    ys.push_back(y);
  }
  if (ys.empty()) throw Error(Errc::EmptyInput, "outlier fences rejected every training row");

  p.norm.method = opts.norm;
  p.norm.a.resize(d);
  p.norm.b.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    const auto& c = cols[j];
    if (opts.norm == NormMethod::MinMax) {
      const auto [lo, hi] = std::minmax_element(c.begin(), c.end());
      p.norm.a[j] = *lo;
      p.norm.b[j] = *hi;
    } else {
      const double mean = std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(c.size());
      double ss = 0.0;
      for (double v : c) ss += (v - mean) * (v - mean);
      p.norm.a[j] = mean;
      p.norm.b[j] = std::sqrt(ss / static_cast<double>(c.size()));
    }
  }

  std::vector<double> scores(d, 0.0);
  bool have_target = std::none_of(ys.begin(), ys.end(), is_missing);
  if (have_target && ys.size() >= 2) {
    for (std::size_t j = 0; j < d; ++j) scores[j] = pearson_r(cols[j], ys);
  }
  p.select = select_features(scores, opts.top_m);
  return p;
}

/// Applies a fitted pipeline to the given rows. Never consults statistics
/// beyond those stored in `p`.
inline TransformedRows apply_pipeline(const FittedPipeline& p, const LabeledDataset& ds,
                                      std::span<const std::size_t> rows) {
  if (!(ds.schema == p.schema)) {
    throw Error(Errc::SchemaMismatch, "dataset schema differs from the fitted pipeline");
  }
  const std::size_t d = p.schema.size();
  TransformedRows out;
  std::vector<double> cells;
  cells.reserve(rows.size() * p.output_width());
  std::vector<double> buf(d);
  for (auto i : rows) {
    auto src = ds.features.row(i);
    std::copy(src.begin(), src.end(), buf.begin());
    double y = ds.target[i];
    if (!clean_row(p, buf, y)) continue;
    for (auto j : p.select.kept) cells.push_back(p.norm.forward(j, buf[j]));
    out.y.push_back(y);
    out.rows.push_back(i);
  }
  out.X = Matrix(out.rows.size(), p.output_width(), std::move(cells));
  return out;
}

inline TransformedRows apply_pipeline(const FittedPipeline& p, const LabeledDataset& ds) {
  std::vector<std::size_t> all(ds.size());
  std::iota(all.begin(), all.end(), 0);
  return apply_pipeline(p, ds, all);
}

}  // namespace solarcast
