#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "solarcast/error.hpp"
#include "solarcast/linear.hpp"
#include "solarcast/matrix.hpp"
#include "solarcast/random.hpp"

namespace solarcast {

struct MlpParams {
  std::size_t hidden = 16;
  std::size_t epochs = 200;
  double learning_rate = 0.01;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

/// One-hidden-layer network d -> h (tanh) -> 1 (identity). The network is
/// trained on standardized targets; `y_offset` and `y_scale` map its output
/// back to kW.
struct MlpModel {
  std::size_t n_inputs = 0;
  std::size_t hidden = 0;
  std::vector<double> w1;  // hidden x n_inputs, row-major
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // hidden
  double b2 = 0.0;
  double y_offset = 0.0;
  double y_scale = 1.0;

  [[nodiscard]] std::size_t input_width() const noexcept { return n_inputs; }

  /// Raw network output (standardized target units).
  [[nodiscard]] double forward(std::span<const double> x, std::span<double> act) const {
    double out = b2;
    for (std::size_t h = 0; h < hidden; ++h) {
      double z = b1[h];
      const double* wr = w1.data() + h * n_inputs;
      for (std::size_t j = 0; j < n_inputs; ++j) z += wr[j] * x[j];
      act[h] = std::tanh(z);
      out += w2[h] * act[h];
    }
    return out;
  }

  [[nodiscard]] double predict_row(std::span<const double> x) const {
    std::vector<double> act(hidden);
    return y_offset + y_scale * forward(x, act);
  }

  [[nodiscard]] std::size_t parameter_count() const noexcept { return hidden * n_inputs + 2 * hidden + 1; }

  friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

/// Flattened parameter order: w1, b1, w2, b2.
inline std::vector<double> mlp_parameters(const MlpModel& m) {
  std::vector<double> p;
  p.reserve(m.parameter_count());
  p.insert(p.end(), m.w1.begin(), m.w1.end());
  p.insert(p.end(), m.b1.begin(), m.b1.end());
  p.insert(p.end(), m.w2.begin(), m.w2.end());
  p.push_back(m.b2);
  return p;
}

inline void set_mlp_parameters(MlpModel& m, std::span<const double> p) {
  if (p.size() != m.parameter_count()) throw Error(Errc::DimensionMismatch, "mlp parameter count");
  auto it = p.begin();
  std::copy_n(it, m.w1.size(), m.w1.begin());
  it += static_cast<std::ptrdiff_t>(m.w1.size());
  std::copy_n(it, m.b1.size(), m.b1.begin());
  it += static_cast<std::ptrdiff_t>(m.b1.size());
  std::copy_n(it, m.w2.size(), m.w2.begin());
  it += static_cast<std::ptrdiff_t>(m.w2.size());
  m.b2 = *it;
}

struct MlpLossGrad {
  double loss = 0.0;
  std::vector<double> grad;  // same layout as mlp_parameters
};

/// Mean squared error of the raw network output against `t` (already in
/// standardized units) over `rows`, with its backpropagated gradient.
inline MlpLossGrad mlp_loss_and_gradient(const MlpModel& m, const Matrix& X, std::span<const double> t,
                                         std::span<const std::size_t> rows) {
  const std::size_t d = m.n_inputs, H = m.hidden;
  MlpLossGrad out;
  out.grad.assign(m.parameter_count(), 0.0);
  double* gw1 = out.grad.data();
  double* gb1 = gw1 + H * d;
  double* gw2 = gb1 + H;
  double& gb2 = out.grad.back();
  std::vector<double> act(H);
  const double inv_b = 1.0 / static_cast<double>(rows.size());
  for (auto r : rows) {
    auto x = X.row(r);
    const double err = m.forward(x, act) - t[r];
    out.loss += err * err * inv_b;
    const double delta = 2.0 * err * inv_b;
    gb2 += delta;
    for (std::size_t h = 0; h < H; ++h) {
      gw2[h] += delta * act[h];
      const double dz = delta * m.w2[h] * (1.0 - act[h] * act[h]);
      gb1[h] += dz;
      double* g = gw1 + h * d;
      for (std::size_t j = 0; j < d; ++j) g[j] += dz * x[j];
    }
  }
  return out;
}

/// Xavier-uniform weights, zero biases.
inline MlpModel init_mlp(std::size_t n_inputs, std::size_t hidden, std::uint64_t seed) {
  MlpModel m;
  m.n_inputs = n_inputs;
  m.hidden = hidden;
  m.w1.resize(hidden * n_inputs);
  m.b1.assign(hidden, 0.0);
  m.w2.resize(hidden);
  Rng rng(mix_seed(seed, 0x1a1e));
  const double lim1 = std::sqrt(6.0 / static_cast<double>(n_inputs + hidden));
  for (auto& w : m.w1) w = rng.uniform(-lim1, lim1);
  const double lim2 = std::sqrt(6.0 / static_cast<double>(hidden + 1));
  for (auto& w : m.w2) w = rng.uniform(-lim2, lim2);
  return m;
}

/// Mini-batch gradient descent on MSE. Inputs are expected to be normalized.
inline MlpModel fit_mlp(const Matrix& X, std::span<const double> y, const MlpParams& params = {}) {
  if (X.rows() != y.size()) throw Error(Errc::LengthMismatch, "X rows differ from target length");
  if (X.rows() == 0) throw Error(Errc::EmptyInput, "fit_mlp needs at least one row");
  if (params.hidden < 1 || params.batch_size < 1 || !(params.learning_rate > 0.0)) {
    throw Error(Errc::InvalidHyperparameter, "mlp needs hidden >= 1, batch_size >= 1, learning_rate > 0");
  }
  detail::require_finite(X, y);
  const std::size_t n = X.rows();

  MlpModel m = init_mlp(X.cols(), params.hidden, params.seed);
  m.y_offset = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : y) ss += (v - m.y_offset) * (v - m.y_offset);
  const double sd = std::sqrt(ss / static_cast<double>(n));
  m.y_scale = sd > 0.0 ? sd : 1.0;
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = (y[i] - m.y_offset) / m.y_scale;

  Rng rng(mix_seed(params.seed, 0xba7c));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto theta = mlp_parameters(m);
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    rng.shuffle(std::span(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += params.batch_size) {
      const auto stop = std::min(n, start + params.batch_size);
      std::span<const std::size_t> batch(order.data() + start, stop - start);
      const auto lg = mlp_loss_and_gradient(m, X, t, batch);
      epoch_loss += lg.loss;
      for (std::size_t p = 0; p < theta.size(); ++p) theta[p] -= params.learning_rate * lg.grad[p];
      set_mlp_parameters(m, theta);
    }
    if (!std::isfinite(epoch_loss)) {
      throw Error(Errc::NonFiniteLoss, "training diverged at epoch " + std::to_string(epoch));
    }
  }
  return m;
}

}  // namespace solarcast
