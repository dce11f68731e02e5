#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "solarcast/error.hpp"
#include "solarcast/linear.hpp"
#include "solarcast/matrix.hpp"
#include "solarcast/random.hpp"

namespace solarcast {

struct SvrParams {
  double epsilon = 0.1;
  double C = 1.0;
  std::size_t steps = 50000;
  double step_size = 0.1;
  std::uint64_t seed = 0;
  friend bool operator==(const SvrParams&, const SvrParams&) = default;
};

/// Linear epsilon-insensitive regressor.
struct SvrModel {
  std::vector<double> weights;
  double intercept = 0.0;
  double epsilon = 0.0;
  double C = 1.0;

  [[nodiscard]] std::size_t input_width() const noexcept { return weights.size(); }

  [[nodiscard]] double predict_row(std::span<const double> x) const {
    double acc = intercept;
    for (std::size_t j = 0; j < weights.size(); ++j) acc += weights[j] * x[j];
    return acc;
  }

  friend bool operator==(const SvrModel&, const SvrModel&) = default;
};

/// Subgradient of one sample's epsilon-insensitive loss with respect to the
/// residual-producing prediction: -sign(r) outside the tube, 0 inside.
inline double svr_loss_slope(double residual, double epsilon) {
  if (residual > epsilon) return -1.0;
  if (residual < -epsilon) return 1.0;
  return 0.0;
}

/// Minimizes 1/2 |w|^2 + C * sum max(0, |y - w.x - b| - eps) by stochastic
/// subgradient descent with step_size / sqrt(t + 1) and an average over the
/// second half of the iterates.
///
/// Targets are divided by s = rms(y) first. With w = s w' and b = s b' the
/// objective equals s^2 * [1/2 |w'|^2 + (C/s) * sum max(0, |y/s - w'.x - b'| - eps/s)],
/// so the scaled problem with C' = C/s and eps' = eps/s has the same minimizer.
/// The zero starting point maps to zero.
inline SvrModel fit_svr(const Matrix& X, std::span<const double> y, const SvrParams& params = {}) {
  if (X.rows() != y.size()) throw Error(Errc::LengthMismatch, "X rows differ from target length");
  if (X.rows() == 0) throw Error(Errc::EmptyInput, "fit_svr needs at least one row");
  if (!(params.epsilon >= 0.0) || !(params.C > 0.0) || !(params.step_size > 0.0)) {
    throw Error(Errc::InvalidHyperparameter, "svr needs epsilon >= 0, C > 0, step_size > 0");
  }
  detail::require_finite(X, y);
  const std::size_t n = X.rows(), d = X.cols();

  double ss = 0.0;
  for (double v : y) ss += v * v;
  double scale = std::sqrt(ss / static_cast<double>(n));
  if (!(scale > 0.0)) scale = 1.0;
  const double eps = params.epsilon / scale;
  const double lambda = scale / (params.C * static_cast<double>(n));

  std::vector<double> w(d, 0.0), w_avg(d, 0.0);
  double b = 0.0, b_avg = 0.0;
  std::size_t averaged = 0;
  const std::size_t burn_in = params.steps / 2;
  Rng rng(mix_seed(params.seed, 0x5e7));
  for (std::size_t t = 0; t < params.steps; ++t) {
    const auto i = static_cast<std::size_t>(rng.below(n));
    auto x = X.row(i);
    double pred = b;
    for (std::size_t j = 0; j < d; ++j) pred += w[j] * x[j];
    const double slope = svr_loss_slope(y[i] / scale - pred, eps);
    const double eta = params.step_size / std::sqrt(static_cast<double>(t + 1));
    for (std::size_t j = 0; j < d; ++j) w[j] -= eta * (lambda * w[j] + slope * x[j]);
    b -= eta * slope;
    if (t >= burn_in) {
      ++averaged;
      const double inv = 1.0 / static_cast<double>(averaged);
      for (std::size_t j = 0; j < d; ++j) w_avg[j] += (w[j] - w_avg[j]) * inv;
      b_avg += (b - b_avg) * inv;
    }
  }

  SvrModel m;
  m.epsilon = params.epsilon;
  m.C = params.C;
  m.weights.resize(d);
  for (std::size_t j = 0; j < d; ++j) m.weights[j] = scale * (averaged ? w_avg[j] : w[j]);
  m.intercept = scale * (averaged ? b_avg : b);
  for (double v : m.weights) {
    if (!std::isfinite(v)) throw Error(Errc::NonFiniteLoss, "svr weights diverged");
  }
  return m;
}

}  // namespace solarcast
