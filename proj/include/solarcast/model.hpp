#pragma once

#include <string>
#include <variant>
#include <vector>

#include "solarcast/learners.hpp"
#include "solarcast/stacking.hpp"

namespace solarcast {

/// Anything the CLI can persist and predict with: a single learner or a stack.
using FittedModel = std::variant<TrainedModel, StackedEnsemble>;

inline std::string model_name(const FittedModel& m) {
  if (const auto* t = std::get_if<TrainedModel>(&m)) return std::string(learner_name(*t));
  return "stack";
}

inline std::size_t input_width(const FittedModel& m) {
  if (const auto* t = std::get_if<TrainedModel>(&m)) return input_width(*t);
  return std::get<StackedEnsemble>(m).input_width();
}

inline std::vector<double> predict(const FittedModel& m, const Matrix& X) {
  if (const auto* t = std::get_if<TrainedModel>(&m)) return predict(*t, X);
  return predict_stack(std::get<StackedEnsemble>(m), X);
}

}  // namespace solarcast
