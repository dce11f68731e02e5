#include <gtest/gtest.h>

#include "solarcast/learners.hpp"
#include "solarcast/random.hpp"

using namespace solarcast;

namespace {

struct Problem {
  Matrix X;
  std::vector<double> y;
};

Problem random_problem(std::uint64_t seed, std::size_t n, std::size_t d) {
  Rng rng(seed);
  Problem p{Matrix(n, d), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      p.X(i, j) = rng.uniform(0, 1);
      s += (static_cast<double>(j) + 1) * p.X(i, j);
    }
    p.y[i] = std::sin(3 * s) * 10 + rng.normal();
  }
  return p;
}

TreeModel stub(double left, double right) {
  TreeModel t;
  t.n_features = 1;
  t.nodes = {{0, 0.5, 1, 2, (left + right) / 2, 2}, {-1, 0, -1, -1, left, 1}, {-1, 0, -1, -1, right, 1}};
  return t;
}

double mse(const GbmModel& m, const Matrix& X, std::span<const double> y, std::size_t stages) {
  double s = 0.0;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const double e = y[i] - m.predict_row(X.row(i), stages);
    s += e * e;
  }
  return s / static_cast<double>(X.rows());
}

}  // namespace

TEST(Forest, SingleUnbaggedFullFeatureForestEqualsTree) {
  const auto p = random_problem(1, 150, 4);
  ForestParams fp;
  fp.n_trees = 1;
  fp.bootstrap = false;
  fp.feature_subsample = 4;
  const auto forest = fit_forest(p.X, p.y, fp);
  const auto tree = fit_tree(p.X, p.y, TreeParams{fp.max_depth, fp.min_samples_leaf, fp.min_improvement});
  EXPECT_EQ(forest.trees.front(), tree);
  const auto q = random_problem(2, 100, 4);
  for (std::size_t i = 0; i < q.X.rows(); ++i) EXPECT_EQ(forest.predict_row(q.X.row(i)), tree.predict_row(q.X.row(i)));
}

TEST(Forest, AveragesTrees) {
  ForestModel f;
  f.n_features = 1;
  f.trees = {stub(1, 1), stub(3, 3)};
  for (double x : {-5.0, 0.2, 0.9, 100.0}) {
    const std::vector<double> v{x};
    EXPECT_EQ(f.predict_row(v), 2.0);
  }
  f.trees = {stub(0, 10), stub(2, 4)};
  const std::vector<double> lo{0.0}, hi{1.0};
  EXPECT_EQ(f.predict_row(lo), 1.0);
  EXPECT_EQ(f.predict_row(hi), 7.0);
}

TEST(Forest, DeterministicAndWorkerIndependent) {
  const auto p = random_problem(3, 200, 5);
  ForestParams fp;
  fp.n_trees = 12;
  fp.seed = 99;
  const auto a = fit_forest(p.X, p.y, fp, 1);
  EXPECT_EQ(a, fit_forest(p.X, p.y, fp, 1));
  EXPECT_EQ(a, fit_forest(p.X, p.y, fp, 3));
  fp.seed = 100;
  EXPECT_FALSE(a == fit_forest(p.X, p.y, fp, 1));
}

TEST(Forest, DefaultSubsample) {
  EXPECT_EQ(default_feature_subsample(1), 1u);
  EXPECT_EQ(default_feature_subsample(4), 1u);
  EXPECT_EQ(default_feature_subsample(9), 3u);
}

TEST(Forest, Errors) {
  const auto p = random_problem(4, 20, 2);
  ForestParams fp;
  fp.n_trees = 0;
  EXPECT_THROW(fit_forest(p.X, p.y, fp), Error);
  fp.n_trees = 2;
  fp.feature_subsample = 3;
  EXPECT_THROW(fit_forest(p.X, p.y, fp), Error);
}

TEST(Gbm, InitialIsMean) {
  const auto X = Matrix::from_rows({{1}, {2}, {3}, {4}});
  const std::vector<double> y{0, 0, 10, 10};
  GbmParams gp;
  gp.rounds = 1;
  const auto m = fit_gbm(X, y, gp);
  EXPECT_EQ(m.initial, 5.0);
  const std::vector<double> x{2};
  EXPECT_EQ(m.predict_row(x, 0), 5.0);
}

TEST(Gbm, SingleFullStepStumpFitsStepFunction) {
  const auto X = Matrix::from_rows({{1}, {2}, {3}, {4}});
  const std::vector<double> y{0, 0, 10, 10};
  GbmParams gp;
  gp.rounds = 1;
  gp.learning_rate = 1.0;
  gp.max_depth = 1;
  const auto m = fit_gbm(X, y, gp);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(m.predict_row(X.row(i)), y[i]);
  EXPECT_EQ(mse(m, X, y, 1), 0.0);
}

TEST(Gbm, TrainingMseNonIncreasing) {
  const auto p = random_problem(5, 300, 3);
  GbmParams gp;
  gp.rounds = 60;
  const auto m = fit_gbm(p.X, p.y, gp);
  double prev = mse(m, p.X, p.y, 0);
  for (std::size_t t = 1; t <= gp.rounds; ++t) {
    const double cur = mse(m, p.X, p.y, t);
    EXPECT_LE(cur, prev) << t;
    prev = cur;
  }
}

TEST(Gbm, Errors) {
  const auto p = random_problem(6, 20, 2);
  GbmParams gp;
  gp.rounds = 0;
  EXPECT_THROW(fit_gbm(p.X, p.y, gp), Error);
  gp.rounds = 1;
  gp.learning_rate = 0.0;
  EXPECT_THROW(fit_gbm(p.X, p.y, gp), Error);
  gp.learning_rate = 1.5;
  EXPECT_THROW(fit_gbm(p.X, p.y, gp), Error);
}

TEST(LocationShift, TreeModelsAndLinearShiftByConstant) {
  const auto p = random_problem(7, 120, 3);
  const auto q = random_problem(8, 50, 3);
  const double c = 37.25;
  std::vector<double> shifted(p.y);
  for (auto& v : shifted) v += c;
  ForestParams fp;
  fp.n_trees = 5;
  fp.seed = 3;
  GbmParams gp;
  gp.rounds = 20;
  for (const LearnerSpec& spec : {LearnerSpec{TreeParams{}}, LearnerSpec{fp}, LearnerSpec{gp}, LearnerSpec{LinearParams{}}}) {
    const auto a = predict(fit(spec, p.X, p.y), q.X);
    const auto b = predict(fit(spec, p.X, shifted), q.X);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(b[i], a[i] + c, 1e-9) << learner_name(spec);
  }
}
