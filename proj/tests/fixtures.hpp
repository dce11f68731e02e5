#pragma once

// Small trained models of every variant for persistence and determinism tests.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "solarcast/solarcast.hpp"

namespace fixture {

struct Trained {
  solarcast::ModelBundle bundle;
  solarcast::Matrix X;
  std::vector<double> y;
};

/// Preprocessed synthetic training rows (4 features, ~4 days hourly).
inline Trained training_rows(std::uint64_t seed) {
  solarcast::SynthConfig sc;
  sc.n_days = 4;
  sc.seed = seed;
  const auto ds = solarcast::generate_synthetic(sc);
  const auto sp = solarcast::split(ds, 0.25, seed);
  Trained t;
  t.bundle.pipeline = solarcast::fit_pipeline(ds, sp.train);
  auto rows = solarcast::apply_pipeline(t.bundle.pipeline, ds, sp.train);
  t.X = std::move(rows.X);
  t.y = std::move(rows.y);
  t.bundle.created_at = "2021-06-04T23:00:00Z";
  t.bundle.config = {{"seed", seed}};
  return t;
}

/// Fast hyperparameters for one model name, including "stack".
inline solarcast::FittedModel fit_small(const std::string& name, const solarcast::Matrix& X,
                                        std::span<const double> y, std::uint64_t seed) {
  using namespace solarcast;
  Json hyper = {{"forest", {{"n_trees", 6}}}, {"gbm", {{"rounds", 15}}}, {"mlp", {{"epochs", 15}}},
                {"svr", {{"steps", 3000}}}};
  if (name == "stack") return fit_stack(resolve_stack(hyper, 4, seed), X, y);
  return fit(resolve_spec(name, hyper, seed), X, y);
}

inline Trained trained(const std::string& name, std::uint64_t seed) {
  auto t = training_rows(seed);
  t.bundle.model = fit_small(name, t.X, t.y, seed);
  return t;
}

/// Uniform random inputs in [-0.25, 1.25]^d, i.e. around the normalized range.
inline solarcast::Matrix random_inputs(std::size_t n, std::size_t d, std::uint64_t seed) {
  solarcast::Rng rng(seed);
  solarcast::Matrix X(n, d);
  for (auto& v : X.data()) v = rng.uniform(-0.25, 1.25);
  return X;
}

/// Largest relative error between the analytic MLP gradient and central
/// differences (step 1e-5) on a random 3-sample batch with random parameters.
/// Denominators are floored at 1e-6 so vanishing components compare absolutely.
inline double mlp_gradient_error(std::uint64_t seed) {
  using namespace solarcast;
  Rng rng(seed);
  const std::size_t d = 1 + rng.below(4), h = 1 + rng.below(6);
  MlpModel m = init_mlp(d, h, seed);
  auto theta = mlp_parameters(m);
  for (auto& v : theta) v = rng.uniform(-1, 1);
  set_mlp_parameters(m, theta);
  Matrix X(3, d);
  std::vector<double> t(3);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < d; ++j) X(i, j) = rng.uniform(-1, 1);
    t[i] = rng.normal();
  }
  const std::vector<std::size_t> rows{0, 1, 2};
  const auto analytic = mlp_loss_and_gradient(m, X, t, rows).grad;

  const double step = 1e-5;
  double worst = 0.0;
  for (std::size_t p = 0; p < theta.size(); ++p) {
    auto probe = theta;
    MlpModel mp = m;
    probe[p] = theta[p] + step;
    set_mlp_parameters(mp, probe);
    const double up = mlp_loss_and_gradient(mp, X, t, rows).loss;
    probe[p] = theta[p] - step;
    set_mlp_parameters(mp, probe);
    const double down = mlp_loss_and_gradient(mp, X, t, rows).loss;
    const double numeric = (up - down) / (2 * step);
    const double denom = std::max({std::abs(analytic[p]), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic[p] - numeric) / denom);
  }
  return worst;
}

}  // namespace fixture
