#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "solarcast/error.hpp"
#include "solarcast/matrix.hpp"

namespace solarcast {

struct LinearParams {
  double ridge_lambda = 0.0;
  friend bool operator==(const LinearParams&, const LinearParams&) = default;
};

struct LinearModel {
  std::vector<double> weights;
  double intercept = 0.0;
  double ridge_lambda = 0.0;

  [[nodiscard]] std::size_t input_width() const noexcept { return weights.size(); }

  [[nodiscard]] double predict_row(std::span<const double> x) const {
    double acc = intercept;
    for (std::size_t j = 0; j < weights.size(); ++j) acc += weights[j] * x[j];
    return acc;
  }

  friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

inline constexpr double kSingularFallbackLambda = 1e-8;

namespace detail {

inline void require_finite(const Matrix& X, std::span<const double> y) {
  for (double v : X.data()) {
    if (!std::isfinite(v)) throw Error(Errc::NonFiniteInput, "non-finite feature value");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw Error(Errc::NonFiniteInput, "non-finite target value");
  }
}

/// Solves A x = b for symmetric positive definite A (row-major, size d*d) by
/// Cholesky. Returns nullopt when a pivot is not safely positive.
inline std::optional<std::vector<double>> cholesky_solve(std::vector<double> A,
                                                         std::vector<double> b,
                                                         double rel_tol = 1e-12) {
  const std::size_t d = b.size();
  double max_diag = 0.0;
  for (std::size_t i = 0; i < d; ++i) max_diag = std::max(max_diag, std::abs(A[i * d + i]));
  const double tol = rel_tol * max_diag;
  for (std::size_t j = 0; j < d; ++j) {
    double s = A[j * d + j];
    for (std::size_t k = 0; k < j; ++k) s -= A[j * d + k] * A[j * d + k];
    if (!(s > tol)) return std::nullopt;
    const double ljj = std::sqrt(s);
    A[j * d + j] = ljj;
    for (std::size_t i = j + 1; i < d; ++i) {
      double t = A[i * d + j];
      for (std::size_t k = 0; k < j; ++k) t -= A[i * d + k] * A[j * d + k];
      A[i * d + j] = t / ljj;
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    double t = b[i];
    for (std::size_t k = 0; k < i; ++k) t -= A[i * d + k] * b[k];
    b[i] = t / A[i * d + i];
  }
  for (std::size_t i = d; i-- > 0;) {
    double t = b[i];
    for (std::size_t k = i + 1; k < d; ++k) t -= A[k * d + i] * b[k];
    b[i] = t / A[i * d + i];
  }
  return b;
}

}  // namespace detail

/// Least squares with an unpenalized intercept. The intercept is eliminated by
/// centering, which leaves (Xc'Xc + lambda I) w = Xc'yc. A singular system with
/// lambda = 0 is retried with lambda = 1e-8.
inline LinearModel fit_linear(const Matrix& X, std::span<const double> y, double ridge_lambda = 0.0) {
  if (X.rows() != y.size()) throw Error(Errc::LengthMismatch, "X rows differ from target length");
  if (X.rows() == 0) throw Error(Errc::EmptyInput, "fit_linear needs at least one row");
  if (!(ridge_lambda >= 0.0)) throw Error(Errc::InvalidHyperparameter, "ridge_lambda must be >= 0");
  detail::require_finite(X, y);

  const std::size_t n = X.rows(), d = X.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> xmean(d, 0.0);
  double ymean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto r = X.row(i);
    for (std::size_t j = 0; j < d; ++j) xmean[j] += r[j];
    ymean += y[i];
  }
  for (auto& m : xmean) m *= inv_n;
  ymean *= inv_n;

  std::vector<double> gram(d * d, 0.0), rhs(d, 0.0), xc(d);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = X.row(i);
    for (std::size_t j = 0; j < d; ++j) xc[j] = r[j] - xmean[j];
    const double yc = y[i] - ymean;
    for (std::size_t j = 0; j < d; ++j) {
      rhs[j] += xc[j] * yc;
      for (std::size_t k = 0; k <= j; ++k) gram[j * d + k] += xc[j] * xc[k];
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t k = 0; k < j; ++k) gram[k * d + j] = gram[j * d + k];
  }

  LinearModel m;
  m.ridge_lambda = ridge_lambda;
  if (d > 0) {
    auto solve_with = [&](double lambda, double rel_tol) {
      auto A = gram;
      for (std::size_t j = 0; j < d; ++j) A[j * d + j] += lambda;
      return detail::cholesky_solve(std::move(A), rhs, rel_tol);
    };
    auto w = solve_with(ridge_lambda, ridge_lambda == 0.0 ? 1e-12 : 0.0);
    if (!w && ridge_lambda == 0.0) {
      w = solve_with(kSingularFallbackLambda, 0.0);
      m.ridge_lambda = kSingularFallbackLambda;
    }
    if (!w) throw Error(Errc::NonFiniteInput, "normal equations could not be solved");
    m.weights = std::move(*w);
  }
  m.intercept = ymean;
  for (std::size_t j = 0; j < d; ++j) m.intercept -= m.weights[j] * xmean[j];
  return m;
}

}  // namespace solarcast
