#include <gtest/gtest.h>

#include <numeric>

#include "solarcast/preprocess.hpp"
#include "solarcast/random.hpp"

using namespace solarcast;

namespace {

// Dataset over a custom schema with one row per entry of `cols[0]`.
LabeledDataset make_ds(const std::vector<std::vector<double>>& cols, std::vector<double> target) {
  LabeledDataset ds;
  const std::size_t n = target.size(), d = cols.size();
  ds.schema.names.clear();
  for (std::size_t j = 0; j < d; ++j) ds.schema.names.push_back("f" + std::to_string(j));
  ds.features = Matrix(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    ds.timestamps.push_back(static_cast<std::int64_t>(i) * 60);
    for (std::size_t j = 0; j < d; ++j) ds.features(i, j) = cols[j][i];
  }
  ds.target = std::move(target);
  return ds;
}

std::vector<std::size_t> iota_n(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

}  // namespace

TEST(Quantile, Examples) {
  const std::vector<double> a{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(quantile(a, 0.5), 2.5);
  const std::vector<double> s{5};
  EXPECT_EQ(quantile(s, 0.0), 5.0);
  EXPECT_EQ(quantile(s, 0.37), 5.0);
  EXPECT_EQ(quantile(s, 1.0), 5.0);
  const std::vector<double> b{1, 2, 3, 4, 5};
  EXPECT_EQ(quantile(b, 0.25), 2.0);
  EXPECT_EQ(quantile(b, 0.0), 1.0);
  EXPECT_EQ(quantile(b, 1.0), 5.0);
  EXPECT_THROW(quantile(std::vector<double>{}, 0.5), Error);
  EXPECT_THROW(quantile(b, 1.5), Error);
}

TEST(Fences, LargeValueFlaggedAsOutlier) {
  // Sorted [1..8, 1000]: Q1 sits at position 2 (value 3), Q3 at position 6
  // (value 7), so IQR = 4 and the fences are [-3, 13].
  std::vector<double> col{1, 2, 3, 4, 5, 6, 7, 8, 1000};
  const auto ds = make_ds({col}, std::vector<double>(9, 1.0));
  PreprocessOptions opts;
  opts.fence_target = false;
  const auto p = fit_pipeline(ds, iota_n(9), opts);
  EXPECT_EQ(p.fences.features[0].lower, -3.0);
  EXPECT_EQ(p.fences.features[0].upper, 13.0);

  const auto out = apply_pipeline(p, ds);
  EXPECT_EQ(out.rows, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7}));
  // Normalization was fit on the eight surviving rows.
  EXPECT_EQ(p.norm.a[0], 1.0);
  EXPECT_EQ(p.norm.b[0], 8.0);
}

TEST(Fences, ClipPolicyKeepsRowAtFence) {
  std::vector<double> col{1, 2, 3, 4, 5, 6, 7, 8, 1000};
  const auto ds = make_ds({col}, std::vector<double>(9, 1.0));
  PreprocessOptions opts;
  opts.policy = OutlierPolicy::Clip;
  const auto p = fit_pipeline(ds, iota_n(9), opts);
  const auto out = apply_pipeline(p, ds);
  ASSERT_EQ(out.rows.size(), 9u);
  EXPECT_EQ(p.norm.b[0], 13.0);
  EXPECT_EQ(out.X(8, 0), 1.0);
}

TEST(Fences, NoOutliersMeansNoDrops) {
  Rng rng(3);
  std::vector<double> a(200), b(200), y(200);
  for (std::size_t i = 0; i < 200; ++i) {
    a[i] = rng.uniform(0, 1);
    b[i] = rng.uniform(-5, 5);
    y[i] = rng.uniform(0, 10);
  }
  const auto ds = make_ds({a, b}, y);
  const auto p = fit_pipeline(ds, iota_n(200));
  EXPECT_EQ(apply_pipeline(p, ds).rows.size(), 200u);
}

TEST(Fences, TargetFenceDropsOutlyingTarget) {
  std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 9};
  const auto ds = make_ds({x}, {1, 2, 3, 4, 5, 6, 7, 8, 500});
  const auto p = fit_pipeline(ds, iota_n(9));
  ASSERT_TRUE(p.fences.target);
  EXPECT_EQ(apply_pipeline(p, ds).rows.size(), 8u);
}

TEST(MinMax, FitParamsAndEndpoints) {
  const auto ds = make_ds({{0, 10}}, {1, 2});
  const auto p = fit_pipeline(ds, iota_n(2));
  EXPECT_EQ(p.norm.a[0], 0.0);
  EXPECT_EQ(p.norm.b[0], 10.0);
  const auto out = apply_pipeline(p, ds);
  EXPECT_EQ(out.X(0, 0), 0.0);
  EXPECT_EQ(out.X(1, 0), 1.0);
}

TEST(MinMax, ConstantColumnMapsToZero) {
  const auto ds = make_ds({{4, 4, 4}, {1, 2, 3}}, {1, 2, 3});
  PreprocessOptions opts;
  opts.fence_target = false;
  const auto p = fit_pipeline(ds, iota_n(3), opts);
  for (double v : {4.0, -100.0, 1e9}) EXPECT_EQ(p.norm.forward(0, v), 0.0);
}

TEST(MinMax, TestValueAboveMaxIsNotClamped) {
  // Train on rows 0..3; row 4 lies past the max but inside the fences.
  const auto ds = make_ds({{0, 2, 4, 6, 7}}, {1, 1, 1, 1, 1});
  const std::vector<std::size_t> train{0, 1, 2, 3};
  const auto p = fit_pipeline(ds, train);
  const std::vector<std::size_t> test{4};
  const auto out = apply_pipeline(p, ds, test);
  ASSERT_EQ(out.rows.size(), 1u);
  EXPECT_GT(out.X(0, 0), 1.0);
}

TEST(Normalization, InverseRoundTrips) {
  Rng rng(11);
  for (auto method : {NormMethod::MinMax, NormMethod::ZScore}) {
    std::vector<double> a(50), y(50);
    for (std::size_t i = 0; i < 50; ++i) {
      a[i] = rng.uniform(-30, 80);
      y[i] = rng.uniform(0, 1);
    }
    const auto ds = make_ds({a}, y);
    PreprocessOptions opts;
    opts.norm = method;
    opts.policy = OutlierPolicy::Clip;
    const auto p = fit_pipeline(ds, iota_n(50), opts);
    for (double v : a) EXPECT_NEAR(p.norm.inverse(0, p.norm.forward(0, v)), v, 1e-9);
  }
}

TEST(Imputation, MissingCellsFilledWithTrainMean) {
  const auto ds = make_ds({{1, kMissing, 3}, {1, 2, 3}}, {1, 2, 3});
  PreprocessOptions opts;
  opts.norm = NormMethod::MinMax;
  const auto p = fit_pipeline(ds, iota_n(3), opts);
  EXPECT_EQ(p.impute.fill[0], 2.0);
  const auto out = apply_pipeline(p, ds);
  ASSERT_EQ(out.rows.size(), 3u);
  ASSERT_EQ(p.select.kept[0], 0u);
  EXPECT_EQ(p.norm.inverse(0, out.X(1, 0)), 2.0);
}

TEST(Imputation, AllMissingFeatureIsAnError) {
  const auto ds = make_ds({{kMissing, kMissing}, {1, 2}}, {1, 2});
  try {
    fit_pipeline(ds, iota_n(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::AllMissingFeature);
  }
}

TEST(Pearson, Examples) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> y, z;
  for (double v : x) {
    y.push_back(2 * v + 1);
    z.push_back(-v);
  }
  EXPECT_DOUBLE_EQ(pearson_r(x, y), 1.0);
  EXPECT_DOUBLE_EQ(pearson_r(x, z), -1.0);
  // Hand evaluation: dx = [-1,0,1], dy = [0,-1,1], sxy = 1, sxx = syy = 2.
  EXPECT_DOUBLE_EQ(pearson_r(std::vector<double>{1, 2, 3}, std::vector<double>{2, 1, 3}), 0.5);
  EXPECT_EQ(pearson_r(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), 0.0);
}

TEST(Pearson, AffineInvariance) {
  Rng rng(5);
  std::vector<double> x(30), y(30), xs(30), yn(30);
  for (std::size_t i = 0; i < 30; ++i) {
    x[i] = rng.normal();
    y[i] = x[i] + rng.normal();
    xs[i] = 3.5 * x[i] - 7;
    yn[i] = -2 * y[i] + 1;
  }
  const double r = pearson_r(x, y);
  EXPECT_NEAR(pearson_r(xs, y), r, 1e-12);
  EXPECT_NEAR(pearson_r(x, yn), -r, 1e-12);
}

TEST(Selection, Examples) {
  EXPECT_EQ(select_features(std::vector<double>{0.9, 0.1, 0.5}, 2).kept, (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(select_features(std::vector<double>{0.9, 0.1, 0.5}, 3).kept, (std::vector<std::size_t>{0, 2, 1}));
  EXPECT_EQ(select_features(std::vector<double>{0.9, 0.1, 0.5}).kept, (std::vector<std::size_t>{0, 2, 1}));
  EXPECT_EQ(select_features(std::vector<double>{0.5, 0.5}, 1).kept, (std::vector<std::size_t>{0}));
  EXPECT_EQ(select_features(std::vector<double>{-0.8, 0.5}, 1).kept, (std::vector<std::size_t>{0}));
}

TEST(Selection, Errors) {
  try {
    select_features(std::vector<double>{0.1, 0.2}, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::TopMExceedsFeatureCount);
  }
  EXPECT_THROW(select_features(std::vector<double>{0.1}, 0), Error);
}

TEST(Selection, FeatureEqualToTargetRanksFirst) {
  std::vector<double> y{1, 5, 2, 8, 3, 7};
  const auto ds = make_ds({{3, 1, 4, 1, 5, 9}, y, {2, 7, 1, 8, 2, 8}}, y);
  PreprocessOptions opts;
  opts.top_m = 2;
  const auto p = fit_pipeline(ds, iota_n(6), opts);
  EXPECT_DOUBLE_EQ(p.select.scores[1], 1.0);
  EXPECT_EQ(p.select.kept.front(), 1u);
  EXPECT_EQ(p.output_width(), 2u);
  EXPECT_EQ(p.output_names().front(), "f1");
}

TEST(Pipeline, LeakageInvariant) {
  Rng rng(21);
  const std::size_t n = 120;
  std::vector<double> a(n), b(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = rng.uniform(0, 10);
    b[i] = rng.normal() * 3;
    y[i] = rng.uniform(0, 100);
  }
  auto ds = make_ds({a, b}, y);
  std::vector<std::size_t> train, test;
  for (std::size_t i = 0; i < n; ++i) (i % 4 == 0 ? test : train).push_back(i);
  PreprocessOptions opts;
  opts.policy = OutlierPolicy::Clip;
  const auto p = fit_pipeline(ds, train, opts);
  const auto before = apply_pipeline(p, ds, test);

  // Mutate every other test row and reverse the order; each row's output is unchanged.
  auto mutated = ds;
  for (std::size_t k = 1; k < test.size(); k += 2) {
    mutated.features(test[k], 0) = 1e6;
    mutated.features(test[k], 1) = kMissing;
  }
  std::vector<std::size_t> rev(test.rbegin(), test.rend());
  const auto after = apply_pipeline(p, mutated, rev);
  ASSERT_EQ(after.rows.size(), before.rows.size());
  for (std::size_t k = 0; k < test.size(); k += 2) {
    const std::size_t r = test.size() - 1 - k;
    EXPECT_EQ(after.rows[r], before.rows[k]);
    for (std::size_t j = 0; j < p.output_width(); ++j) EXPECT_EQ(after.X(r, j), before.X(k, j));
  }
  EXPECT_EQ(fit_pipeline(ds, train, opts), p);
}

TEST(Pipeline, SchemaMismatchOnApply) {
  const auto ds = make_ds({{1, 2, 3}}, {1, 2, 3});
  const auto p = fit_pipeline(ds, iota_n(3));
  auto other = ds;
  other.schema.names[0] = "g0";
  try {
    apply_pipeline(p, other);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::SchemaMismatch);
  }
}
