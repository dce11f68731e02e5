#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "solarcast/ensemble_trees.hpp"
#include "solarcast/error.hpp"
#include "solarcast/knn.hpp"
#include "solarcast/linear.hpp"
#include "solarcast/matrix.hpp"
#include "solarcast/mlp.hpp"
#include "solarcast/svr.hpp"
#include "solarcast/tree.hpp"

namespace solarcast {

/// Hyperparameters for one learner; the alternative selects the learner.
using LearnerSpec =
    std::variant<LinearParams, TreeParams, ForestParams, GbmParams, KnnParams, MlpParams, SvrParams>;

using TrainedModel =
    std::variant<LinearModel, TreeModel, ForestModel, GbmModel, KnnModel, MlpModel, SvrModel>;

inline constexpr std::string_view kLearnerNames[] = {"linreg", "tree", "forest", "gbm",
                                                      "knn",    "mlp",  "svr"};

inline std::string_view learner_name(const LearnerSpec& spec) { return kLearnerNames[spec.index()]; }
inline std::string_view learner_name(const TrainedModel& model) { return kLearnerNames[model.index()]; }

/// Spec with default hyperparameters for a learner name.
inline LearnerSpec default_spec(std::string_view name, std::uint64_t seed = 0) {
  if (name == "linreg") return LinearParams{};
  if (name == "tree") return TreeParams{};
  if (name == "forest") {
    ForestParams p;
    p.seed = seed;
    return p;
  }
  if (name == "gbm") {
    GbmParams p;
    p.seed = seed;
    return p;
  }
  if (name == "knn") return KnnParams{};
  if (name == "mlp") {
    MlpParams p;
    p.seed = seed;
    return p;
  }
  if (name == "svr") {
    SvrParams p;
    p.seed = seed;
    return p;
  }
  throw Error(Errc::InvalidConfig, "unknown learner '" + std::string(name) + "'");
}

/// Replaces the seed of a stochastic spec; deterministic learners are unchanged.
inline LearnerSpec with_seed(LearnerSpec spec, std::uint64_t seed) {
  std::visit(
      [seed](auto& p) {
        if constexpr (requires { p.seed; }) p.seed = seed;
      },
      spec);
  return spec;
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

inline TrainedModel fit(const LearnerSpec& spec, const Matrix& X, std::span<const double> y,
                        std::size_t workers = 1) {
  return std::visit(
      overloaded{
          [&](const LinearParams& p) -> TrainedModel { return fit_linear(X, y, p.ridge_lambda); },
          [&](const TreeParams& p) -> TrainedModel { return fit_tree(X, y, p); },
          [&](const ForestParams& p) -> TrainedModel { return fit_forest(X, y, p, workers); },
          [&](const GbmParams& p) -> TrainedModel { return fit_gbm(X, y, p); },
          [&](const KnnParams& p) -> TrainedModel { return fit_knn(X, y, p); },
          [&](const MlpParams& p) -> TrainedModel { return fit_mlp(X, y, p); },
          [&](const SvrParams& p) -> TrainedModel { return fit_svr(X, y, p); },
      },
      spec);
}

inline std::size_t input_width(const TrainedModel& model) {
  return std::visit([](const auto& m) { return m.input_width(); }, model);
}

inline double predict_row(const TrainedModel& model, std::span<const double> x) {
  return std::visit([&](const auto& m) { return m.predict_row(x); }, model);
}

inline std::vector<double> predict(const TrainedModel& model, const Matrix& X) {
  const auto d = input_width(model);
  if (X.cols() != d && !X.empty()) {
    throw Error(Errc::DimensionMismatch,
                "model expects " + std::to_string(d) + " features, got " + std::to_string(X.cols()));
  }
  std::vector<double> out(X.rows());
  std::visit(
      [&](const auto& m) {
        for (std::size_t i = 0; i < X.rows(); ++i) out[i] = m.predict_row(X.row(i));
      },
      model);
  return out;
}

}  // namespace solarcast
