#include <gtest/gtest.h>

#include <numeric>

#include "oracles.hpp"
#include "solarcast/knn.hpp"
#include "solarcast/random.hpp"

using namespace solarcast;

namespace {

std::vector<std::vector<double>> random_rows(Rng& rng, std::size_t n, std::size_t d, bool grid) {
  std::vector<std::vector<double>> rows(n, std::vector<double>(d));
  for (auto& r : rows) {
    for (auto& v : r) v = grid ? static_cast<double>(rng.below(4)) : rng.uniform(-1, 1);
  }
  return rows;
}

}  // namespace

TEST(Knn, OneNeighbourReturnsOwnTarget) {
  const auto X = Matrix::from_rows({{0, 0}, {1, 0}, {0, 1}, {5, 5}});
  const std::vector<double> y{1, 2, 3, 4};
  KnnParams kp;
  kp.k = 1;
  const auto m = fit_knn(X, y, kp);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(knn_predict(m, X.row(i)), y[i]);
}

TEST(Knn, AllNeighboursGiveMean) {
  const auto X = Matrix::from_rows({{0}, {1}, {2}, {3}});
  const std::vector<double> y{1, 2, 3, 6};
  KnnParams kp;
  kp.k = 4;
  const auto m = fit_knn(X, y, kp);
  const std::vector<double> q{17.0};
  EXPECT_EQ(knn_predict(m, q), 3.0);
}

TEST(Knn, EqualDistancesPreferLowerIndex) {
  const auto X = Matrix::from_rows({{-1}, {1}});
  const std::vector<double> y{10, 20};
  KnnParams kp;
  kp.k = 1;
  const std::vector<double> q{0.0};
  EXPECT_EQ(knn_predict(fit_knn(X, y, kp), q), 10.0);
}

TEST(Knn, MatchesExhaustiveScan) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng rng(seed);
    const bool grid = seed % 2 == 1;  // grid data has many distance ties
    const std::size_t n = 50 + rng.below(151), d = 1 + rng.below(4);
    const auto rows = random_rows(rng, n, d, grid);
    std::vector<double> y(n);
    for (auto& v : y) v = rng.uniform(0, 100);
    KnnParams kp;
    kp.k = 1 + rng.below(10);
    const auto m = fit_knn(Matrix::from_rows(rows), y, kp);
    for (const auto& q : random_rows(rng, 20, d, grid)) {
      EXPECT_EQ(knn_predict(m, q), oracle::knn_scan(rows, y, q, kp.k)) << seed;
    }
  }
}

TEST(Knn, InverseDistanceWeighting) {
  const auto X = Matrix::from_rows({{0}, {3}});
  const std::vector<double> y{0, 12};
  KnnParams kp{2, KnnWeighting::InverseDistance};
  const auto m = fit_knn(X, y, kp);
  const std::vector<double> q{1.0}, exact{3.0};
  // Weights 1 and 1/2.
  EXPECT_DOUBLE_EQ(knn_predict(m, q), 4.0);
  EXPECT_EQ(knn_predict(m, exact), 12.0);
}

TEST(Knn, Errors) {
  const auto X = Matrix::from_rows({{0}, {1}});
  const std::vector<double> y{0, 1};
  KnnParams kp;
  kp.k = 3;
  EXPECT_THROW(fit_knn(X, y, kp), Error);
  kp.k = 0;
  EXPECT_THROW(fit_knn(X, y, kp), Error);
  kp.k = 1;
  const std::vector<double> wide{1, 2};
  EXPECT_THROW(knn_predict(fit_knn(X, y, kp), wide), Error);
}
