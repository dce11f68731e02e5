#pragma once

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "solarcast/data.hpp"
#include "solarcast/metrics.hpp"
#include "solarcast/model.hpp"
#include "solarcast/preprocess.hpp"
#include "solarcast/report.hpp"
#include "solarcast/serialize.hpp"
#include "solarcast/stacking.hpp"

namespace solarcast {

inline constexpr std::string_view kModelChoices[] = {"linreg", "tree", "forest", "gbm",
                                                     "knn",    "mlp",  "svr",    "stack"};

struct ExperimentConfig {
  std::optional<std::filesystem::path> data_path;  // unset: synthesize
  SynthConfig synth;
  std::vector<std::string> models = {"stack"};
  Json hyperparameters = Json::object();  // {"forest": {"n_trees": 50}, ...}
  PreprocessOptions preprocess;
  double test_fraction = 0.2;
  std::size_t k_folds = 4;
  std::optional<std::uint64_t> seed;  // required
  double threshold_kw = 0.0;
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::filesystem::path> model_out;  // default: <out_dir>/model.solr
  std::size_t workers = 1;
};

/// Learner spec for `name` with defaults, seeded from the experiment seed,
/// then overridden by cfg.hyperparameters[name].
inline LearnerSpec resolve_spec(const std::string& name, const Json& hyperparameters, std::uint64_t seed) {
  Json j = codec::encode(default_spec(name, seed));
  if (hyperparameters.contains(name)) {
    for (const auto& [k, v] : hyperparameters.at(name).items()) j[k] = v;
  }
  try {
    return codec::decode_spec(j);
  } catch (const Json::exception& e) {
    throw Error(Errc::InvalidConfig, "hyperparameters for " + name + ": " + e.what());
  }
}

inline StackConfig resolve_stack(const Json& hyperparameters, std::size_t k_folds, std::uint64_t seed) {
  StackConfig cfg = StackConfig::defaults(seed);
  cfg.k_folds = k_folds;
  for (auto& spec : cfg.base_specs) {
    std::uint64_t base_seed = 0;
    std::visit(
        [&](const auto& p) {
          if constexpr (requires { p.seed; }) base_seed = p.seed;
        },
        spec);
    spec = resolve_spec(std::string(learner_name(spec)), hyperparameters, base_seed);
  }
  if (hyperparameters.contains("stack")) {
    const auto& s = hyperparameters.at("stack");
    if (s.contains("include_original_features")) {
      cfg.include_original_features = s.at("include_original_features").get<bool>();
    }
  }
  return cfg;
}

inline FittedModel fit_named(const std::string& name, const ExperimentConfig& cfg, const Matrix& X,
                             std::span<const double> y) {
  const auto seed = *cfg.seed;
  if (name == "stack") return fit_stack(resolve_stack(cfg.hyperparameters, cfg.k_folds, seed), X, y, cfg.workers);
  return fit(resolve_spec(name, cfg.hyperparameters, seed), X, y, cfg.workers);
}

inline const char* policy_name(OutlierPolicy p) { return p == OutlierPolicy::Drop ? "drop" : "clip"; }
inline const char* norm_name(NormMethod m) { return m == NormMethod::MinMax ? "minmax" : "zscore"; }

/// Config echo stored in model files. Output locations and worker count are
/// left out so that the file depends only on what determines the model.
inline Json config_echo(const ExperimentConfig& cfg, std::size_t n_rows) {
  Json j;
  j["seed"] = *cfg.seed;
  if (cfg.data_path) {
    j["data"] = cfg.data_path->generic_string();
  } else {
    j["synth"] = {{"days", cfg.synth.n_days},
                  {"step_minutes", cfg.synth.step_minutes},
                  {"peak_irradiance", cfg.synth.peak_irradiance},
                  {"panel_efficiency", cfg.synth.panel_efficiency},
                  {"noise_std", cfg.synth.noise_std},
                  {"seed", cfg.synth.seed}};
  }
  j["models"] = cfg.models;
  j["hyperparameters"] = cfg.hyperparameters;
  j["preprocess"] = {{"policy", policy_name(cfg.preprocess.policy)},
                     {"norm", norm_name(cfg.preprocess.norm)},
                     {"fence_multiplier", cfg.preprocess.fence_multiplier},
                     {"fence_target", cfg.preprocess.fence_target},
                     {"top_m", cfg.preprocess.top_m ? Json(*cfg.preprocess.top_m) : Json(nullptr)}};
  j["split"] = {{"test_fraction", cfg.test_fraction}, {"seed", *cfg.seed}, {"n_rows", n_rows}};
  j["k_folds"] = cfg.k_folds;
  j["threshold_kw"] = cfg.threshold_kw;
  return j;
}

struct ModelResult {
  std::string name;
  EvaluationReport report;
  ErrorTable table;
  FittedModel model;
  std::vector<std::pair<std::string, EvaluationReport>> base_reports;  // stack only
};

struct ExperimentResult {
  std::vector<ModelResult> results;  // in requested order
  std::size_t best = 0;              // index of lowest test RMSE
  FittedPipeline pipeline;
  SplitIndices split;
  std::size_t dataset_rows = 0;
  std::optional<std::filesystem::path> model_path;

  [[nodiscard]] const ModelResult& best_result() const { return results[best]; }
};

inline std::string render_ranking_csv(const ExperimentResult& r) {
  std::vector<std::size_t> order(r.results.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return r.results[a].report.rmse < r.results[b].report.rmse;
  });
  std::string out = "rank,model,rmse,mae,pearson_r,best\n";
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& m = r.results[order[i]];
    out += std::to_string(i + 1) + "," + m.name + "," + text::format_double(m.report.rmse) + "," +
           text::format_double(m.report.mae) + "," + text::format_double(m.report.pearson_r) + "," +
           (order[i] == r.best ? "1" : "0") + "\n";
  }
  return out;
}

inline std::string render_base_reports_csv(const ModelResult& m) {
  std::string out = "base_model,rmse,mae,pearson_r\n";
  for (const auto& [name, rep] : m.base_reports) {
    out += name + "," + text::format_double(rep.rmse) + "," + text::format_double(rep.mae) + "," +
           text::format_double(rep.pearson_r) + "\n";
  }
  return out;
}

inline LabeledDataset load_experiment_data(const ExperimentConfig& cfg) {
  if (cfg.data_path) return load_csv(*cfg.data_path).data;
  return generate_synthetic(cfg.synth);
}

/// Load or synthesize -> split -> fit preprocessing on train -> train each
/// requested model -> evaluate on the held-out rows -> write artifacts.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (!cfg.seed) throw Error(Errc::InvalidConfig, "experiment seed is required");
  if (cfg.models.empty()) throw Error(Errc::InvalidConfig, "no models requested");
  for (const auto& m : cfg.models) {
    if (std::find(std::begin(kModelChoices), std::end(kModelChoices), m) == std::end(kModelChoices)) {
      throw Error(Errc::InvalidConfig, "unknown model '" + m + "'");
    }
  }
  const auto ds = load_experiment_data(cfg);

  ExperimentResult out;
  out.dataset_rows = ds.size();
  out.split = split(ds, cfg.test_fraction, *cfg.seed);
  out.pipeline = fit_pipeline(ds, out.split.train, cfg.preprocess);
  const auto train = apply_pipeline(out.pipeline, ds, out.split.train);
  const auto test = apply_pipeline(out.pipeline, ds, out.split.test);
  if (test.rows.empty()) throw Error(Errc::EmptyInput, "no held-out rows survived preprocessing");

  std::vector<std::int64_t> ids(test.rows.begin(), test.rows.end());
  for (const auto& name : cfg.models) {
    ModelResult mr{name, {}, {}, fit_named(name, cfg, train.X, train.y), {}};
    const auto pred = predict(mr.model, test.X);
    mr.report = evaluate(test.y, pred, cfg.threshold_kw);
    mr.table = error_table(ids, test.y, pred);
    if (const auto* e = std::get_if<StackedEnsemble>(&mr.model)) {
      const auto base = base_predictions(*e, test.X);
      for (std::size_t b = 0; b < base.size(); ++b) {
        mr.base_reports.emplace_back(std::string(learner_name(e->base_models[b])),
                                     evaluate(test.y, base[b], cfg.threshold_kw));
      }
    }
    out.results.push_back(std::move(mr));
  }
  for (std::size_t i = 1; i < out.results.size(); ++i) {
    if (out.results[i].report.rmse < out.results[out.best].report.rmse) out.best = i;
  }

  if (cfg.out_dir || cfg.model_out) {
    const auto& best = out.best_result();
    std::int64_t latest = 0;
    for (auto i : out.split.train) latest = std::max(latest, ds.timestamps[i]);
    ModelBundle bundle{best.model, out.pipeline, text::format_iso8601(latest), config_echo(cfg, ds.size())};
    bundle.config["selected_model"] = best.name;
    out.model_path = cfg.model_out ? *cfg.model_out : *cfg.out_dir / "model.solr";
    if (out.model_path->has_parent_path()) {
      std::error_code ec;
      std::filesystem::create_directories(out.model_path->parent_path(), ec);
    }
    save_model(bundle, *out.model_path);
  }
  if (cfg.out_dir) {
    const auto& best = out.best_result();
    emit_report(best.report, best.table, *cfg.out_dir, best.name);
    if (out.results.size() > 1) write_text_file(*cfg.out_dir / "ranking.csv", render_ranking_csv(out));
    if (!best.base_reports.empty()) {
      write_text_file(*cfg.out_dir / "stack_bases.csv", render_base_reports_csv(best));
    }
  }
  return out;
}

struct Scored {
  TransformedRows rows;
  std::vector<double> predicted;
};

/// Preprocesses `rows` of `ds` with the stored pipeline and predicts them.
inline Scored score_rows(const ModelBundle& bundle, const LabeledDataset& ds, std::span<const std::size_t> rows) {
  Scored s{apply_pipeline(bundle.pipeline, ds, rows), {}};
  s.predicted = predict(bundle.model, s.rows.X);
  return s;
}

/// Held-out rows of the split recorded in a model file's config echo.
inline std::vector<std::size_t> recorded_test_rows(const ModelBundle& bundle, std::size_t n_rows) {
  const auto& sp = bundle.config.at("split");
  const auto expected = sp.at("n_rows").get<std::size_t>();
  if (expected != n_rows) {
    throw Error(Errc::LengthMismatch, "data has " + std::to_string(n_rows) + " rows but the model was split on " +
                                           std::to_string(expected));
  }
  return split(n_rows, sp.at("test_fraction").get<double>(), sp.at("seed").get<std::uint64_t>()).test;
}

}  // namespace solarcast
