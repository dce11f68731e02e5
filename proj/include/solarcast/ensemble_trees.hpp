#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "solarcast/error.hpp"
#include "solarcast/matrix.hpp"
#include "solarcast/parallel.hpp"
#include "solarcast/random.hpp"
#include "solarcast/tree.hpp"

namespace solarcast {

struct ForestParams {
  std::size_t n_trees = 100;
  int max_depth = 6;
  std::size_t min_samples_leaf = 2;
  double min_improvement = 1e-9;
  std::size_t feature_subsample = 0;  // 0 selects max(1, d/3)
  bool bootstrap = true;
  std::uint64_t seed = 0;
  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

/// Random forest regressor; predicts the arithmetic mean of its trees.
struct ForestModel {
  std::vector<TreeModel> trees;
  std::vector<std::uint64_t> tree_seeds;
  std::size_t feature_subsample = 0;
  bool bootstrap = true;
  std::size_t n_features = 0;

  [[nodiscard]] std::size_t input_width() const noexcept { return n_features; }

  [[nodiscard]] double predict_row(std::span<const double> x) const {
    double acc = 0.0;
    for (const auto& t : trees) acc += t.predict_row(x);
    return acc / static_cast<double>(trees.size());
  }

  friend bool operator==(const ForestModel&, const ForestModel&) = default;
};

inline std::size_t default_feature_subsample(std::size_t d) { return std::max<std::size_t>(1, d / 3); }

inline ForestModel fit_forest(const Matrix& X, std::span<const double> y, const ForestParams& params = {},
                              std::size_t workers = 1) {
  detail::validate_tree_inputs(X, y);
  const std::size_t n = X.rows(), d = X.cols();
  const std::size_t m = params.feature_subsample == 0 ? default_feature_subsample(d)
                                                      : params.feature_subsample;
  if (params.n_trees < 1) throw Error(Errc::InvalidHyperparameter, "n_trees must be >= 1");
  if (m > d) throw Error(Errc::InvalidHyperparameter, "feature_subsample exceeds feature count");

  ForestModel forest;
  forest.feature_subsample = m;
  forest.bootstrap = params.bootstrap;
  forest.n_features = d;
  forest.trees.resize(params.n_trees);
  forest.tree_seeds.resize(params.n_trees);
  for (std::size_t t = 0; t < params.n_trees; ++t) forest.tree_seeds[t] = mix_seed(params.seed, t);

  const TreeParams tree_params{params.max_depth, params.min_samples_leaf, params.min_improvement};
  parallel_for(params.n_trees, workers, [&](std::size_t t) {
    Rng rng(forest.tree_seeds[t]);
    std::vector<std::size_t> rows(n);
    if (params.bootstrap) {
      for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    detail::FeatureSampler sampler;
    if (m < d) {
      sampler = [&rng, d, m] {
        std::vector<std::size_t> all(d);
        std::iota(all.begin(), all.end(), 0);
        for (std::size_t i = 0; i < m; ++i) {
          const auto j = i + static_cast<std::size_t>(rng.below(d - i));
          std::swap(all[i], all[j]);
        }
        all.resize(m);
        std::sort(all.begin(), all.end());
        return all;
      };
    }
    forest.trees[t] = detail::TreeBuilder(X, y, tree_params, sampler).build(std::move(rows));
  });
  return forest;
}

struct GbmParams {
  std::size_t rounds = 100;
  double learning_rate = 0.1;
  int max_depth = 3;
  std::size_t min_samples_leaf = 2;
  // No stochastic component; the seed is recorded for the config echo only.
  std::uint64_t seed = 0;
  friend bool operator==(const GbmParams&, const GbmParams&) = default;
};

struct GbmStage {
  TreeModel tree;
  double learning_rate = 0.0;
  friend bool operator==(const GbmStage&, const GbmStage&) = default;
};

/// Gradient-boosted regression trees under squared loss:
/// F(x) = initial + sum_t lr_t * tree_t(x).
struct GbmModel {
  double initial = 0.0;
  std::vector<GbmStage> stages;
  std::size_t n_features = 0;

  [[nodiscard]] std::size_t input_width() const noexcept { return n_features; }

  /// Prediction using only the first `n_stages` stages.
  [[nodiscard]] double predict_row(std::span<const double> x, std::size_t n_stages) const {
    double acc = initial;
    n_stages = std::min(n_stages, stages.size());
    for (std::size_t t = 0; t < n_stages; ++t) acc += stages[t].learning_rate * stages[t].tree.predict_row(x);
    return acc;
  }

  [[nodiscard]] double predict_row(std::span<const double> x) const {
    return predict_row(x, stages.size());
  }

  friend bool operator==(const GbmModel&, const GbmModel&) = default;
};

inline GbmModel fit_gbm(const Matrix& X, std::span<const double> y, const GbmParams& params = {}) {
  detail::validate_tree_inputs(X, y);
  if (params.rounds < 1) throw Error(Errc::InvalidHyperparameter, "rounds must be >= 1");
  if (!(params.learning_rate > 0.0 && params.learning_rate <= 1.0)) {
    throw Error(Errc::InvalidHyperparameter, "learning_rate must lie in (0, 1]");
  }
  const std::size_t n = X.rows();
  GbmModel model;
  model.n_features = X.cols();
  model.initial = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);

  std::vector<double> fitted(n, model.initial), residual(n);
  const TreeParams tree_params{params.max_depth, params.min_samples_leaf, 1e-9};
  std::vector<std::size_t> rows(n);
  for (std::size_t t = 0; t < params.rounds; ++t) {
    for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - fitted[i];
    std::iota(rows.begin(), rows.end(), 0);
    auto tree = detail::TreeBuilder(X, residual, tree_params, {}).build(rows);
    for (std::size_t i = 0; i < n; ++i) fitted[i] += params.learning_rate * tree.predict_row(X.row(i));
    model.stages.push_back({std::move(tree), params.learning_rate});
  }
  return model;
}

}  // namespace solarcast
