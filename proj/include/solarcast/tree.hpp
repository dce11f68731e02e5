#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "solarcast/error.hpp"
#include "solarcast/linear.hpp"
#include "solarcast/matrix.hpp"

namespace solarcast {

struct TreeParams {
  int max_depth = 6;  // < 0 means unlimited
  std::size_t min_samples_leaf = 2;
  double min_improvement = 1e-9;
  friend bool operator==(const TreeParams&, const TreeParams&) = default;
};

/// Flat CART node. Leaves have feature == -1; splits send x[feature] <= threshold left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;  // mean training target of the node
  std::size_t n = 0;

  [[nodiscard]] bool is_leaf() const noexcept { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct TreeModel {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::size_t n_features = 0;

  [[nodiscard]] std::size_t input_width() const noexcept { return n_features; }

  [[nodiscard]] double predict_row(std::span<const double> x) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
      const auto& nd = nodes[i];
      i = static_cast<std::size_t>(x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left
                                                                                          : nd.right);
    }
    return nodes[i].value;
  }

  [[nodiscard]] std::size_t depth() const {
    std::function<std::size_t(std::size_t)> rec = [&](std::size_t i) -> std::size_t {
      if (nodes[i].is_leaf()) return 0;
      return 1 + std::max(rec(static_cast<std::size_t>(nodes[i].left)),
                          rec(static_cast<std::size_t>(nodes[i].right)));
    };
    return nodes.empty() ? 0 : rec(0);
  }

  friend bool operator==(const TreeModel&, const TreeModel&) = default;
};

struct SplitCandidate {
  double threshold = 0.0;
  double sse_reduction = 0.0;
};

/// Midpoint between two distinct sorted values, guaranteed to satisfy lo <= mid < hi.
inline double split_midpoint(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  return mid < hi ? mid : lo;
}

/// Best threshold on one feature. `x` is sorted ascending and `y` holds the
/// targets in the same order. The reduction for a cut into (L, R) is
/// nL*nR/n * (mean_L - mean_R)^2, which equals SSE(parent) - SSE(L) - SSE(R).
/// Ties keep the lower threshold.
inline std::optional<SplitCandidate> best_split(std::span<const double> x, std::span<const double> y,
                                                std::size_t min_samples_leaf = 1,
                                                double min_improvement = 1e-9) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) return std::nullopt;
  min_samples_leaf = std::max<std::size_t>(min_samples_leaf, 1);
  const double shift = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double total = 0.0;
  for (double v : y) total += v - shift;

  std::optional<SplitCandidate> best;
  double left_sum = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    left_sum += y[i] - shift;
    const std::size_t nl = i + 1, nr = n - nl;
    if (!(x[i] < x[i + 1])) continue;
    if (nl < min_samples_leaf || nr < min_samples_leaf) continue;
    const double diff = left_sum / static_cast<double>(nl) - (total - left_sum) / static_cast<double>(nr);
    const double reduction =
        static_cast<double>(nl) * static_cast<double>(nr) / static_cast<double>(n) * diff * diff;
    if (!best || reduction > best->sse_reduction) {
      best = SplitCandidate{split_midpoint(x[i], x[i + 1]), reduction};
    }
  }
  if (best && best->sse_reduction < min_improvement) return std::nullopt;
  return best;
}

namespace detail {

/// Chooses the candidate features at each node; empty means all features.
using FeatureSampler = std::function<std::vector<std::size_t>()>;

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& X, std::span<const double> y, const TreeParams& params,
              FeatureSampler sampler)
      : X_(X), y_(y), params_(params), sampler_(std::move(sampler)) {}

  TreeModel build(std::vector<std::size_t> rows) {
    model_.n_features = X_.cols();
    grow(std::move(rows), 0);
    return std::move(model_);
  }

 private:
  std::int32_t grow(std::vector<std::size_t> rows, int depth) {
    const auto id = static_cast<std::int32_t>(model_.nodes.size());
    TreeNode node;
    node.n = rows.size();
    double sum = 0.0;
    for (auto r : rows) sum += y_[r];
    node.value = sum / static_cast<double>(rows.size());
    model_.nodes.push_back(node);

    const bool depth_left = params_.max_depth < 0 || depth < params_.max_depth;
    if (!depth_left || rows.size() < 2 * std::max<std::size_t>(params_.min_samples_leaf, 1)) {
      return id;
    }

    std::vector<std::size_t> features;
    if (sampler_) features = sampler_();
    if (features.empty()) {
      features.resize(X_.cols());
      std::iota(features.begin(), features.end(), 0);
    }

    std::optional<SplitCandidate> best;
    std::size_t best_feature = 0;
    std::vector<std::size_t> order(rows);
    std::vector<double> xs(rows.size()), ys(rows.size());
    for (auto f : features) {
      order = rows;
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double xa = X_(a, f), xb = X_(b, f);
        return xa < xb || (xa == xb && a < b);
      });
      for (std::size_t i = 0; i < order.size(); ++i) {
        xs[i] = X_(order[i], f);
        ys[i] = y_[order[i]];
      }
      auto cand = best_split(xs, ys, params_.min_samples_leaf, params_.min_improvement);
      if (cand && (!best || cand->sse_reduction > best->sse_reduction)) {
        best = cand;
        best_feature = f;
      }
    }
    if (!best) return id;

    std::vector<std::size_t> left, right;
    for (auto r : rows) (X_(r, best_feature) <= best->threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    const auto l = grow(std::move(left), depth + 1);
    const auto r = grow(std::move(right), depth + 1);
    auto& nd = model_.nodes[static_cast<std::size_t>(id)];
    nd.feature = static_cast<int>(best_feature);
    nd.threshold = best->threshold;
    nd.left = l;
    nd.right = r;
    return id;
  }

  const Matrix& X_;
  std::span<const double> y_;
  TreeParams params_;
  FeatureSampler sampler_;
  TreeModel model_;
};

inline void validate_tree_inputs(const Matrix& X, std::span<const double> y) {
  if (X.rows() != y.size()) throw Error(Errc::LengthMismatch, "X rows differ from target length");
  if (X.rows() == 0) throw Error(Errc::EmptyInput, "tree needs at least one row");
  require_finite(X, y);
}

}  // namespace detail

/// Greedy CART regression tree. Features are scanned in ascending index order
/// and a later feature must strictly beat the current best, so ties go to the
/// lower feature index and then the lower threshold.
inline TreeModel fit_tree(const Matrix& X, std::span<const double> y, const TreeParams& params = {}) {
  detail::validate_tree_inputs(X, y);
  std::vector<std::size_t> rows(X.rows());
  std::iota(rows.begin(), rows.end(), 0);
  return detail::TreeBuilder(X, y, params, {}).build(std::move(rows));
}

}  // namespace solarcast
