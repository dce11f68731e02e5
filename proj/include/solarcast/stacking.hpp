#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "solarcast/data.hpp"
#include "solarcast/error.hpp"
#include "solarcast/learners.hpp"
#include "solarcast/linear.hpp"
#include "solarcast/matrix.hpp"
#include "solarcast/parallel.hpp"
#include "solarcast/random.hpp"

namespace solarcast {

struct StackConfig {
  std::vector<LearnerSpec> base_specs;
  std::size_t k_folds = 4;
  bool include_original_features = true;
  std::uint64_t seed = 0;

  /// KNN, MLP, random forest and gradient boosting under a linear meta-learner.
  static StackConfig defaults(std::uint64_t seed) {
    StackConfig cfg;
    cfg.seed = seed;
    const char* names[] = {"knn", "mlp", "forest", "gbm"};
    for (std::uint64_t b = 0; b < 4; ++b) cfg.base_specs.push_back(default_spec(names[b], mix_seed(seed, b)));
    return cfg;
  }
};

struct StackedEnsemble {
  std::vector<TrainedModel> base_models;  // refit on the full training set, spec order
  LinearModel meta;
  StackConfig config;
  std::size_t n_features = 0;

  [[nodiscard]] std::size_t input_width() const noexcept { return n_features; }
  [[nodiscard]] std::size_t meta_width() const noexcept {
    return base_models.size() + (config.include_original_features ? n_features : 0);
  }
};

/// Meta-learner input [base predictions || original features].
inline Matrix meta_matrix(std::span<const std::vector<double>> base_predictions, const Matrix& X,
                          bool include_original) {
  const std::size_t n = X.rows(), B = base_predictions.size();
  const std::size_t width = B + (include_original ? X.cols() : 0);
  Matrix M(n, width);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t b = 0; b < B; ++b) M(i, b) = base_predictions[b][i];
    if (include_original) {
      auto src = X.row(i);
      std::copy(src.begin(), src.end(), M.row(i).begin() + static_cast<std::ptrdiff_t>(B));
    }
  }
  return M;
}

inline void validate_folds(std::span<const std::vector<std::size_t>> folds, std::size_t n) {
  std::vector<char> seen(n, 0);
  std::size_t total = 0;
  for (const auto& f : folds) {
    for (auto i : f) {
      if (i >= n || seen[i]) throw Error(Errc::InvalidFoldCount, "folds do not partition the rows");
      seen[i] = 1;
      ++total;
    }
  }
  if (total != n) throw Error(Errc::InvalidFoldCount, "folds do not cover every row");
}

/// Row i of the result comes from a model trained on every row outside
/// row i's fold, so the prediction never depends on y[i] or its fold-mates.
inline std::vector<double> out_of_fold_predictions(const LearnerSpec& spec, const Matrix& X,
                                                   std::span<const double> y,
                                                   std::span<const std::vector<std::size_t>> folds,
                                                   std::size_t workers = 1) {
  const std::size_t n = X.rows();
  if (y.size() != n) throw Error(Errc::LengthMismatch, "X rows differ from target length");
  validate_folds(folds, n);
  std::vector<double> oof(n, 0.0);
  parallel_for(folds.size(), workers, [&](std::size_t f) {
    std::vector<char> held(n, 0);
    for (auto i : folds[f]) held[i] = 1;
    std::vector<std::size_t> train;
    train.reserve(n - folds[f].size());
    for (std::size_t i = 0; i < n; ++i) {
      if (!held[i]) train.push_back(i);
    }
    const Matrix Xtr = X.select_rows(train);
    std::vector<double> ytr;
    ytr.reserve(train.size());
    for (auto i : train) ytr.push_back(y[i]);
    const auto model = fit(spec, Xtr, ytr);
    for (auto i : folds[f]) oof[i] = predict_row(model, X.row(i));
  });
  return oof;
}

inline StackedEnsemble fit_stack(const StackConfig& cfg, const Matrix& X, std::span<const double> y,
                                 std::size_t workers = 1) {
  const std::size_t n = X.rows(), B = cfg.base_specs.size();
  if (y.size() != n) throw Error(Errc::LengthMismatch, "X rows differ from target length");
  if (B < 2) throw Error(Errc::InvalidConfig, "stacking needs at least two base models");
  const auto folds = kfold_partition(n, cfg.k_folds, cfg.seed);

  // Jobs [0, B*K) are fold fits, [B*K, B*K + B) are the full refits.
  const std::size_t K = folds.size();
  std::vector<std::vector<double>> oof(B, std::vector<double>(n, 0.0));
  std::vector<TrainedModel> refit(B);
  std::vector<std::vector<std::size_t>> fold_train(K);
  for (std::size_t f = 0; f < K; ++f) {
    std::vector<char> held(n, 0);
    for (auto i : folds[f]) held[i] = 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (!held[i]) fold_train[f].push_back(i);
    }
  }
  parallel_for(B * K + B, workers, [&](std::size_t job) {
    if (job >= B * K) {
      const auto b = job - B * K;
      refit[b] = fit(cfg.base_specs[b], X, y);
      return;
    }
    const auto b = job / K, f = job % K;
    const Matrix Xtr = X.select_rows(fold_train[f]);
    std::vector<double> ytr;
    ytr.reserve(fold_train[f].size());
    for (auto i : fold_train[f]) ytr.push_back(y[i]);
    const auto model = fit(cfg.base_specs[b], Xtr, ytr);
    for (auto i : folds[f]) oof[b][i] = predict_row(model, X.row(i));
  });

  StackedEnsemble e;
  e.config = cfg;
  e.n_features = X.cols();
  e.base_models = std::move(refit);
  e.meta = fit_linear(meta_matrix(oof, X, cfg.include_original_features), y, 0.0);
  return e;
}

/// Predictions of every refit base model, one vector per model.
inline std::vector<std::vector<double>> base_predictions(const StackedEnsemble& e, const Matrix& X) {
  std::vector<std::vector<double>> preds;
  preds.reserve(e.base_models.size());
  for (const auto& m : e.base_models) preds.push_back(predict(m, X));
  return preds;
}

inline std::vector<double> predict_stack(const StackedEnsemble& e, const Matrix& X) {
  if (X.cols() != e.n_features && !X.empty()) {
    throw Error(Errc::DimensionMismatch,
                "ensemble expects " + std::to_string(e.n_features) + " features, got " +
                    std::to_string(X.cols()));
  }
  const auto preds = base_predictions(e, X);
  const auto M = meta_matrix(preds, X, e.config.include_original_features);
  std::vector<double> out(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) out[i] = e.meta.predict_row(M.row(i));
  return out;
}

}  // namespace solarcast
