#include <gtest/gtest.h>

#include "oracles.hpp"
#include "solarcast/linear.hpp"
#include "solarcast/random.hpp"

using namespace solarcast;

TEST(Linear, TwoPointsInterpolatedExactly) {
  const auto X = Matrix::from_rows({{0}, {1}});
  const std::vector<double> y{1, 3};
  const auto m = fit_linear(X, y);
  EXPECT_NEAR(m.intercept, 1.0, 1e-12);
  ASSERT_EQ(m.weights.size(), 1u);
  EXPECT_NEAR(m.weights[0], 2.0, 1e-12);
}

TEST(Linear, ConstantTargetGivesZeroWeights) {
  const auto X = Matrix::from_rows({{1, 5}, {2, -1}, {3, 4}, {7, 0}});
  const std::vector<double> y(4, 6.5);
  const auto m = fit_linear(X, y);
  EXPECT_EQ(m.intercept, 6.5);
  for (double w : m.weights) EXPECT_EQ(w, 0.0);
}

TEST(Linear, AffineEvaluation) {
  LinearModel m{{2.0}, 1.0, 0.0};
  const std::vector<double> x{3};
  EXPECT_EQ(m.predict_row(x), 7.0);
}

TEST(Linear, MatchesGradientDescentOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    std::vector<std::vector<double>> rows(6, std::vector<double>(2));
    std::vector<double> y(6);
    for (std::size_t i = 0; i < 6; ++i) {
      rows[i][0] = rng.uniform(-1, 1);
      rows[i][1] = rng.uniform(-1, 1);
      y[i] = rng.uniform(-2, 2);
    }
    const auto m = fit_linear(Matrix::from_rows(rows), y);
    const auto ref = oracle::least_squares_gd(rows, y);
    EXPECT_NEAR(m.weights[0], ref[0], 1e-6) << seed;
    EXPECT_NEAR(m.weights[1], ref[1], 1e-6) << seed;
    EXPECT_NEAR(m.intercept, ref[2], 1e-6) << seed;
  }
}

TEST(Linear, DuplicateColumnFallsBackToRidge) {
  const auto X = Matrix::from_rows({{1, 1}, {2, 2}, {3, 3}, {4, 4}});
  const std::vector<double> y{2, 4, 6, 8};
  const auto m = fit_linear(X, y);
  EXPECT_EQ(m.ridge_lambda, kSingularFallbackLambda);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(m.predict_row(X.row(i)), y[i], 1e-6);
  // The tiny ridge splits the weight evenly up to conditioning error.
  EXPECT_NEAR(m.weights[0], 1.0, 1e-6);
  EXPECT_NEAR(m.weights[1], 1.0, 1e-6);
}

TEST(Linear, RidgeShrinksWeights) {
  const auto X = Matrix::from_rows({{0}, {1}, {2}, {3}});
  const std::vector<double> y{0, 1, 2, 3};
  const auto ols = fit_linear(X, y, 0.0);
  const auto ridge = fit_linear(X, y, 5.0);
  // Centered gram is 5, so w = 5 / (5 + 5).
  EXPECT_NEAR(ridge.weights[0], 0.5, 1e-12);
  EXPECT_LT(ridge.weights[0], ols.weights[0]);
}

TEST(Linear, Errors) {
  const auto X = Matrix::from_rows({{1}, {2}});
  EXPECT_THROW(fit_linear(X, std::vector<double>{1}), Error);
  EXPECT_THROW(fit_linear(X, std::vector<double>{1, 2}, -1.0), Error);
  try {
    fit_linear(X, std::vector<double>{1, std::nan("")});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NonFiniteInput);
  }
}
