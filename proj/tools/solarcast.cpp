// solarcast: batch CLI for the solar power forecasting toolkit.
//
//   solarcast synth      --days N --step-min M --seed S --out data.csv
//   solarcast preprocess --data data.csv --policy drop|clip --norm minmax|zscore --out clean.csv
//   solarcast train      --data data.csv --model stack --k-folds 4 --test-fraction 0.2 --seed S --out model.solr
//   solarcast evaluate   --model model.solr --data data.csv --threshold-kw 0 --out-dir results/
//   solarcast predict    --model model.solr --data new.csv --out preds.csv
//   solarcast report     --results results/ --format txt|csv|svg
//
// Every subcommand also accepts --config file.json with the same keys as its
// flags (underscores or dashes); flags given on the command line win.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "solarcast/solarcast.hpp"

namespace fs = std::filesystem;
using namespace solarcast;

namespace {

/// Reads a JSON object as CLI11 config items. Top-level scalar keys belong to
/// the subcommand being run; an object keyed by a subcommand name targets
/// that subcommand explicitly.
class ConfigJson : public CLI::Config {
 public:
  explicit ConfigJson(const CLI::App* root) : root_(root) {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override {
    return "{}";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json j;
    try {
      input >> j;
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError("config", std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config", "config must be a JSON object");
    std::vector<std::string> parents;
    const auto subs = root_->get_subcommands();
    if (!subs.empty()) parents.push_back(subs.front()->get_name());
    std::vector<CLI::ConfigItem> items;
    collect(j, parents, items);
    return items;
  }

 private:
  static std::string flag_name(std::string key) {
    for (auto& c : key) {
      if (c == '_') c = '-';
    }
    return key;
  }

  static std::string scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }

  static void collect(const nlohmann::json& j, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, v] : j.items()) {
      if (v.is_object()) {
        collect(v, {key}, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = flag_name(key);
      if (v.is_array()) {
        for (const auto& e : v) item.inputs.push_back(scalar(e));
      } else {
        item.inputs.push_back(scalar(v));
      }
      items.push_back(std::move(item));
    }
  }

  const CLI::App* root_;
};

const std::map<std::string, OutlierPolicy> kPolicies{{"drop", OutlierPolicy::Drop}, {"clip", OutlierPolicy::Clip}};
const std::map<std::string, NormMethod> kNorms{{"minmax", NormMethod::MinMax}, {"zscore", NormMethod::ZScore}};

struct PreprocessFlags {
  std::string policy = "drop";
  std::string norm = "minmax";
  std::size_t top_m = 0;

  void add(CLI::App* app) {
    app->add_option("--policy", policy, "Outlier policy")->check(CLI::IsMember({"drop", "clip"}));
    app->add_option("--norm", norm, "Normalization")->check(CLI::IsMember({"minmax", "zscore"}));
    app->add_option("--top-m", top_m, "Keep the m features most correlated with power (0 = all)");
  }

  [[nodiscard]] PreprocessOptions options() const {
    PreprocessOptions o;
    o.policy = kPolicies.at(policy);
    o.norm = kNorms.at(norm);
    if (top_m > 0) o.top_m = top_m;
    return o;
  }
};

/// Per-learner hyperparameter flags, collected into the experiment's
/// hyperparameter document only when given.
struct HyperFlags {
  struct Entry {
    std::string learner, key;
    CLI::Option* opt;
    std::string value;
    bool numeric = true;
  };
  std::vector<std::unique_ptr<Entry>> entries;

  void add(CLI::App* app, const std::string& flag, const std::string& learner, const std::string& key,
           const std::string& help, bool numeric = true) {
    auto e = std::make_unique<Entry>();
    e->learner = learner;
    e->key = key;
    e->numeric = numeric;
    e->opt = app->add_option(flag, e->value, help)->group("Hyperparameters");
    entries.push_back(std::move(e));
  }

  void add_all(CLI::App* app) {
    add(app, "--ridge-lambda", "linreg", "ridge_lambda", "Linear regression ridge penalty");
    add(app, "--tree-max-depth", "tree", "max_depth", "Decision tree depth limit (-1 unlimited)");
    add(app, "--tree-min-leaf", "tree", "min_samples_leaf", "Decision tree minimum leaf size");
    add(app, "--forest-trees", "forest", "n_trees", "Random forest size");
    add(app, "--forest-max-depth", "forest", "max_depth", "Random forest depth limit");
    add(app, "--forest-min-leaf", "forest", "min_samples_leaf", "Random forest minimum leaf size");
    add(app, "--forest-features", "forest", "feature_subsample", "Features tried per split (0 = d/3)");
    add(app, "--forest-bootstrap", "forest", "bootstrap", "Bootstrap rows per tree (true/false)");
    add(app, "--gbm-rounds", "gbm", "rounds", "Boosting rounds");
    add(app, "--gbm-lr", "gbm", "learning_rate", "Boosting learning rate");
    add(app, "--gbm-max-depth", "gbm", "max_depth", "Boosting tree depth");
    add(app, "--knn-k", "knn", "k", "Neighbours");
    add(app, "--knn-weighting", "knn", "weighting", "uniform|distance", false);
    add(app, "--mlp-hidden", "mlp", "hidden", "Hidden units");
    add(app, "--mlp-epochs", "mlp", "epochs", "Training epochs");
    add(app, "--mlp-lr", "mlp", "learning_rate", "Learning rate");
    add(app, "--mlp-batch", "mlp", "batch_size", "Mini-batch size");
    add(app, "--svr-epsilon", "svr", "epsilon", "Tube half-width (kW)");
    add(app, "--svr-c", "svr", "C", "Loss weight");
    add(app, "--svr-steps", "svr", "steps", "Subgradient steps");
    add(app, "--svr-step-size", "svr", "step_size", "Initial step size");
  }

  [[nodiscard]] Json document() const {
    Json doc = Json::object();
    for (const auto& e : entries) {
      if (e->opt->count() == 0) continue;
      Json v;
      if (!e->numeric) {
        v = e->value;
      } else if (e->value == "true" || e->value == "false") {
        v = e->value == "true";
      } else {
        try {
          v = Json::parse(e->value);
        } catch (const Json::exception&) {
          throw Error(Errc::InvalidConfig, e->opt->get_name() + " expects a number, got '" + e->value + "'");
        }
      }
      doc[e->learner][e->key] = v;
    }
    return doc;
  }
};

int fail(const Error& e) {
  std::cerr << "solarcast: " << e.what() << '\n';
  return exit_code_for(e.code());
}

void write_predictions(std::ostream& out, const LabeledDataset& ds, const Scored& s) {
  out << "row,timestamp,predicted_power\n";
  for (std::size_t i = 0; i < s.rows.rows.size(); ++i) {
    const auto r = s.rows.rows[i];
    out << r << ',' << text::format_iso8601(ds.timestamps[r]) << ',' << text::format_double(s.predicted[i]) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solar power generation forecasting toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "JSON config file with the same keys as the flags; flags win");
  app.config_formatter(std::make_shared<ConfigJson>(&app));

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic solar dataset");
  SynthConfig sc;
  std::string synth_out;
  synth->add_option("--days", sc.n_days, "Number of days")->required();
  synth->add_option("--step-min", sc.step_minutes, "Sampling step in minutes (divides 1440)")->required();
  synth->add_option("--seed", sc.seed, "Random seed")->required();
  synth->add_option("--out", synth_out, "Output CSV")->required();
  synth->add_option("--peak-irradiance", sc.peak_irradiance, "Clear-sky peak irradiance (W/m²)");
  synth->add_option("--efficiency", sc.panel_efficiency, "kW per W/m² at 25 °C, in (0, 1]");
  synth->add_option("--noise-std", sc.noise_std, "Daytime Gaussian noise (kW)");

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "Fit preprocessing on a CSV and write the cleaned rows");
  std::string pre_data, pre_out;
  PreprocessFlags pre_flags;
  pre->add_option("--data", pre_data, "Input CSV")->required();
  pre->add_option("--out", pre_out, "Output CSV")->required();
  pre_flags.add(pre);

  // train
  auto* train = app.add_subcommand("train", "Split, preprocess, train, evaluate and save a model");
  ExperimentConfig ec;
  std::string train_data, train_out, train_out_dir;
  std::vector<std::string> train_models;
  std::uint64_t train_seed = 0;
  PreprocessFlags train_pre;
  HyperFlags hyper;
  train->add_option("--data", train_data, "Training CSV (omit to synthesize)");
  train->add_option("--synth-days", ec.synth.n_days, "Days to synthesize when --data is omitted");
  train->add_option("--synth-step-min", ec.synth.step_minutes, "Synthetic sampling step in minutes");
  train->add_option("--synth-seed", ec.synth.seed, "Synthetic data seed");
  train->add_option("--model", train_models, "Model(s): linreg|tree|forest|gbm|knn|mlp|svr|stack")
      ->delimiter(',')
      ->check(CLI::IsMember({"linreg", "tree", "forest", "gbm", "knn", "mlp", "svr", "stack"}))
      ->required();
  train->add_option("--k-folds", ec.k_folds, "Stacking folds");
  train->add_option("--test-fraction", ec.test_fraction, "Held-out fraction");
  train->add_option("--seed", train_seed, "Experiment seed")->required();
  train->add_option("--threshold-kw", ec.threshold_kw, "Generation threshold for classification metrics");
  train->add_option("--out", train_out, "Model file (default <out-dir>/model.solr)");
  train->add_option("--out-dir", train_out_dir, "Directory for reports");
  train->add_option("--workers", ec.workers, "Worker threads for fitting");
  train_pre.add(train);
  hyper.add_all(train);

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Evaluate a saved model on a CSV");
  std::string eval_model, eval_data, eval_out_dir, eval_rows = "all";
  double eval_threshold = 0.0;
  eval->add_option("--model", eval_model, "Model file")->required();
  eval->add_option("--data", eval_data, "CSV with power column")->required();
  eval->add_option("--threshold-kw", eval_threshold, "Generation threshold for classification metrics");
  eval->add_option("--out-dir", eval_out_dir, "Directory for reports")->required();
  eval->add_option("--rows", eval_rows, "all rows, or the held-out split recorded at training")
      ->check(CLI::IsMember({"all", "test"}));

  // predict
  auto* pred = app.add_subcommand("predict", "Predict power for a CSV");
  std::string pred_model, pred_data, pred_out;
  pred->add_option("--model", pred_model, "Model file")->required();
  pred->add_option("--data", pred_data, "CSV (power column may be empty)")->required();
  pred->add_option("--out", pred_out, "Predictions CSV")->required();

  // report
  auto* rep = app.add_subcommand("report", "Render a results directory");
  std::string rep_dir, rep_format = "txt";
  rep->add_option("--results", rep_dir, "Results directory")->required();
  rep->add_option("--format", rep_format, "Output format")->check(CLI::IsMember({"txt", "csv", "svg"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*synth) {
      const auto ds = generate_synthetic(sc);
      save_csv(synth_out, ds);
      std::cout << "wrote " << ds.size() << " rows to " << synth_out << '\n';
    } else if (*pre) {
      const auto loaded = load_csv(pre_data);
      const auto& ds = loaded.data;
      std::vector<std::size_t> all(ds.size());
      std::iota(all.begin(), all.end(), 0);
      const auto p = fit_pipeline(ds, all, pre_flags.options());
      const auto t = apply_pipeline(p, ds, all);
      LabeledDataset out;
      out.schema.names = p.output_names();
      for (auto j : p.select.kept) out.schema.units.push_back(ds.schema.units.at(j));
      out.features = t.X;
      out.target = t.y;
      for (auto r : t.rows) out.timestamps.push_back(ds.timestamps[r]);
      save_csv(pre_out, out);
      std::cout << "kept " << t.rows.size() << " of " << ds.size() << " rows (" << loaded.missing_cells
                << " missing cells imputed), wrote " << pre_out << '\n';
    } else if (*train) {
      if (!train_data.empty()) ec.data_path = train_data;
      ec.models = train_models;
      ec.seed = train_seed;
      ec.preprocess = train_pre.options();
      ec.hyperparameters = hyper.document();
      if (!train_out.empty()) ec.model_out = train_out;
      if (!train_out_dir.empty()) ec.out_dir = train_out_dir;
      if (!ec.model_out && !ec.out_dir) throw Error(Errc::InvalidConfig, "train needs --out or --out-dir");
      const auto result = run_experiment(ec);
      for (std::size_t i = 0; i < result.results.size(); ++i) {
        const auto& m = result.results[i];
        std::cout << (i == result.best ? "* " : "  ") << m.name << "  rmse=" << text::format_fixed(m.report.rmse, 3)
                  << " mae=" << text::format_fixed(m.report.mae, 3)
                  << " r=" << text::format_fixed(m.report.pearson_r, 4)
                  << " auc=" << (m.report.auc ? text::format_fixed(*m.report.auc, 4) : std::string("NA")) << '\n';
      }
      std::cout << "model written to " << result.model_path->string() << '\n';
    } else if (*eval) {
      const auto bundle = load_model(eval_model);
      const auto ds = load_csv(eval_data, bundle.pipeline.schema).data;
      std::vector<std::size_t> rows;
      if (eval_rows == "test") {
        rows = recorded_test_rows(bundle, ds.size());
      } else {
        rows.resize(ds.size());
        std::iota(rows.begin(), rows.end(), 0);
      }
      const auto s = score_rows(bundle, ds, rows);
      if (s.rows.rows.empty()) throw Error(Errc::EmptyInput, "no rows to evaluate");
      const auto report = evaluate(s.rows.y, s.predicted, eval_threshold);
      std::vector<std::int64_t> ids(s.rows.rows.begin(), s.rows.rows.end());
      emit_report(report, error_table(ids, s.rows.y, s.predicted), eval_out_dir, model_name(bundle.model));
      std::cout << render_report_txt(report, model_name(bundle.model));
    } else if (*pred) {
      const auto bundle = load_model(pred_model);
      CsvOptions opts;
      opts.require_target = false;
      const auto ds = load_csv(pred_data, bundle.pipeline.schema, opts).data;
      std::vector<std::size_t> rows(ds.size());
      std::iota(rows.begin(), rows.end(), 0);
      const auto s = score_rows(bundle, ds, rows);
      std::ofstream out(pred_out, std::ios::binary);
      if (!out) throw Error(Errc::IoError, "cannot write " + pred_out);
      write_predictions(out, ds, s);
      std::cout << "predicted " << s.rows.rows.size() << " of " << ds.size() << " rows, wrote " << pred_out << '\n';
    } else if (*rep) {
      const fs::path dir = rep_dir;
      if (rep_format == "svg") {
        std::cout << render_scatter_svg(parse_error_csv(read_text_file(dir / "predictions.csv")));
      } else if (rep_format == "csv") {
        std::cout << read_text_file(dir / "report.csv");
      } else {
        const auto parsed = parse_report_csv(read_text_file(dir / "report.csv"));
        std::cout << render_report_txt(parsed.report, parsed.model) << '\n'
                  << render_error_table(parse_error_csv(read_text_file(dir / "predictions.csv")));
      }
    }
  } catch (const Error& e) {
    return fail(e);
  } catch (const std::exception& e) {
    std::cerr << "solarcast: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
