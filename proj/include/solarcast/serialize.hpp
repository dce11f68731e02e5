#pragma once

#include <cctype>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "solarcast/error.hpp"
#include "solarcast/model.hpp"
#include "solarcast/preprocess.hpp"
#include "solarcast/report.hpp"

namespace solarcast {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kModelMagic = "SOLR";
inline constexpr int kModelSchemaVersion = 1;

// Encoding -----------------------------------------------------------------

namespace codec {

inline Json encode(const FittedPipeline& p) {
  Json fences = Json::array();
  for (const auto& f : p.fences.features) fences.push_back({f.lower, f.upper});
  Json j;
  j["features"] = p.schema.names;
  j["units"] = p.schema.units;
  j["fences"] = {
      {"policy", p.fences.policy == OutlierPolicy::Drop ? "drop" : "clip"},
      {"features", fences},
      {"target", p.fences.target ? Json{p.fences.target->lower, p.fences.target->upper} : Json(nullptr)},
  };
  j["impute"] = p.impute.fill;
  j["norm"] = {{"method", p.norm.method == NormMethod::MinMax ? "minmax" : "zscore"}, {"a", p.norm.a}, {"b", p.norm.b}};
  j["select"] = {{"scores", p.select.scores}, {"kept", p.select.kept}};
  j["fitted_on"] = p.fitted_on;
  return j;
}

inline FittedPipeline decode_pipeline(const Json& j) {
  FittedPipeline p;
  p.schema.names = j.at("features").get<std::vector<std::string>>();
  p.schema.units = j.at("units").get<std::vector<std::string>>();
  const auto& fences = j.at("fences");
  const auto policy = fences.at("policy").get<std::string>();
  if (policy != "drop" && policy != "clip") throw Error(Errc::CorruptPayload, "unknown outlier policy");
  p.fences.policy = policy == "drop" ? OutlierPolicy::Drop : OutlierPolicy::Clip;
  for (const auto& f : fences.at("features")) p.fences.features.push_back({f.at(0).get<double>(), f.at(1).get<double>()});
  if (!fences.at("target").is_null()) {
    p.fences.target = Fence{fences.at("target").at(0).get<double>(), fences.at("target").at(1).get<double>()};
  }
  p.impute.fill = j.at("impute").get<std::vector<double>>();
  const auto method = j.at("norm").at("method").get<std::string>();
  if (method != "minmax" && method != "zscore") throw Error(Errc::CorruptPayload, "unknown normalization");
  p.norm.method = method == "minmax" ? NormMethod::MinMax : NormMethod::ZScore;
  p.norm.a = j.at("norm").at("a").get<std::vector<double>>();
  p.norm.b = j.at("norm").at("b").get<std::vector<double>>();
  p.select.scores = j.at("select").at("scores").get<std::vector<double>>();
  p.select.kept = j.at("select").at("kept").get<std::vector<std::size_t>>();
  p.fitted_on = j.at("fitted_on").get<std::size_t>();

  const auto d = p.schema.names.size();
  if (p.fences.features.size() != d || p.impute.fill.size() != d || p.norm.a.size() != d ||
      p.norm.b.size() != d || p.select.scores.size() != d || p.select.kept.empty()) {
    throw Error(Errc::CorruptPayload, "pipeline arrays disagree with the feature count");
  }
  for (auto k : p.select.kept) {
    if (k >= d) throw Error(Errc::CorruptPayload, "selected feature index out of range");
  }
  return p;
}

inline Json encode(const LearnerSpec& spec) {
  Json j;
  j["learner"] = learner_name(spec);
  std::visit(overloaded{
                 [&](const LinearParams& p) { j["ridge_lambda"] = p.ridge_lambda; },
                 [&](const TreeParams& p) {
                   j["max_depth"] = p.max_depth;
                   j["min_samples_leaf"] = p.min_samples_leaf;
                   j["min_improvement"] = p.min_improvement;
                 },
                 [&](const ForestParams& p) {
                   j["n_trees"] = p.n_trees;
                   j["max_depth"] = p.max_depth;
                   j["min_samples_leaf"] = p.min_samples_leaf;
                   j["min_improvement"] = p.min_improvement;
                   j["feature_subsample"] = p.feature_subsample;
                   j["bootstrap"] = p.bootstrap;
                   j["seed"] = p.seed;
                 },
                 [&](const GbmParams& p) {
                   j["rounds"] = p.rounds;
                   j["learning_rate"] = p.learning_rate;
                   j["max_depth"] = p.max_depth;
                   j["min_samples_leaf"] = p.min_samples_leaf;
                   j["seed"] = p.seed;
                 },
                 [&](const KnnParams& p) {
                   j["k"] = p.k;
                   j["weighting"] = p.weighting == KnnWeighting::Uniform ? "uniform" : "distance";
                 },
                 [&](const MlpParams& p) {
                   j["hidden"] = p.hidden;
                   j["epochs"] = p.epochs;
                   j["learning_rate"] = p.learning_rate;
                   j["batch_size"] = p.batch_size;
                   j["seed"] = p.seed;
                 },
                 [&](const SvrParams& p) {
                   j["epsilon"] = p.epsilon;
                   j["C"] = p.C;
                   j["steps"] = p.steps;
                   j["step_size"] = p.step_size;
                   j["seed"] = p.seed;
                 },
             },
             spec);
  return j;
}

/// Reads a learner spec; absent keys keep their defaults.
inline LearnerSpec decode_spec(const Json& j) {
  auto spec = default_spec(j.at("learner").get<std::string>());
  auto take = [&j](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
  };
  std::visit(overloaded{
                 [&](LinearParams& p) { take("ridge_lambda", p.ridge_lambda); },
                 [&](TreeParams& p) {
                   take("max_depth", p.max_depth);
                   take("min_samples_leaf", p.min_samples_leaf);
                   take("min_improvement", p.min_improvement);
                 },
                 [&](ForestParams& p) {
                   take("n_trees", p.n_trees);
                   take("max_depth", p.max_depth);
                   take("min_samples_leaf", p.min_samples_leaf);
                   take("min_improvement", p.min_improvement);
                   take("feature_subsample", p.feature_subsample);
                   take("bootstrap", p.bootstrap);
                   take("seed", p.seed);
                 },
                 [&](GbmParams& p) {
                   take("rounds", p.rounds);
                   take("learning_rate", p.learning_rate);
                   take("max_depth", p.max_depth);
                   take("min_samples_leaf", p.min_samples_leaf);
                   take("seed", p.seed);
                 },
                 [&](KnnParams& p) {
                   take("k", p.k);
                   if (j.contains("weighting")) {
                     const auto w = j.at("weighting").get<std::string>();
                     if (w != "uniform" && w != "distance") throw Error(Errc::InvalidConfig, "unknown knn weighting " + w);
                     p.weighting = w == "uniform" ? KnnWeighting::Uniform : KnnWeighting::InverseDistance;
                   }
                 },
                 [&](MlpParams& p) {
                   take("hidden", p.hidden);
                   take("epochs", p.epochs);
                   take("learning_rate", p.learning_rate);
                   take("batch_size", p.batch_size);
                   take("seed", p.seed);
                 },
                 [&](SvrParams& p) {
                   take("epsilon", p.epsilon);
                   take("C", p.C);
                   take("steps", p.steps);
                   take("step_size", p.step_size);
                   take("seed", p.seed);
                 },
             },
             spec);
  return spec;
}

inline Json encode(const TreeModel& t) {
  Json feature = Json::array(), threshold = Json::array(), left = Json::array(), right = Json::array(),
       value = Json::array(), count = Json::array();
  for (const auto& nd : t.nodes) {
    feature.push_back(nd.feature);
    threshold.push_back(nd.threshold);
    left.push_back(nd.left);
    right.push_back(nd.right);
    value.push_back(nd.value);
    count.push_back(nd.n);
  }
  return {{"n_features", t.n_features},
          {"feature", feature},
          {"threshold", threshold},
          {"left", left},
          {"right", right},
          {"value", value},
          {"n", count}};
}

inline TreeModel decode_tree(const Json& j) {
  TreeModel t;
  t.n_features = j.at("n_features").get<std::size_t>();
  const auto feature = j.at("feature").get<std::vector<int>>();
  const auto threshold = j.at("threshold").get<std::vector<double>>();
  const auto left = j.at("left").get<std::vector<std::int32_t>>();
  const auto right = j.at("right").get<std::vector<std::int32_t>>();
  const auto value = j.at("value").get<std::vector<double>>();
  const auto count = j.at("n").get<std::vector<std::size_t>>();
  const auto m = feature.size();
  if (m == 0 || threshold.size() != m || left.size() != m || right.size() != m || value.size() != m ||
      count.size() != m) {
    throw Error(Errc::CorruptPayload, "tree node arrays disagree in length");
  }
  for (std::size_t i = 0; i < m; ++i) {
    TreeNode nd{feature[i], threshold[i], left[i], right[i], value[i], count[i]};
    if (!nd.is_leaf()) {
      // Children always follow their parent in preorder, which also rules out cycles.
      const auto in_range = [&](std::int32_t c) { return c > static_cast<std::int32_t>(i) && c < static_cast<std::int32_t>(m); };
      if (static_cast<std::size_t>(nd.feature) >= t.n_features || !in_range(nd.left) || !in_range(nd.right)) {
        throw Error(Errc::CorruptPayload, "tree node references are out of range");
      }
    }
    t.nodes.push_back(nd);
  }
  return t;
}

inline Json encode(const TrainedModel& model) {
  Json j;
  j["kind"] = learner_name(model);
  std::visit(overloaded{
                 [&](const LinearModel& m) {
                   j["weights"] = m.weights;
                   j["intercept"] = m.intercept;
                   j["ridge_lambda"] = m.ridge_lambda;
                 },
                 [&](const TreeModel& m) { j["tree"] = encode(m); },
                 [&](const ForestModel& m) {
                   j["n_features"] = m.n_features;
                   j["feature_subsample"] = m.feature_subsample;
                   j["bootstrap"] = m.bootstrap;
                   j["tree_seeds"] = m.tree_seeds;
                   Json trees = Json::array();
                   for (const auto& t : m.trees) trees.push_back(encode(t));
                   j["trees"] = std::move(trees);
                 },
                 [&](const GbmModel& m) {
                   j["n_features"] = m.n_features;
                   j["initial"] = m.initial;
                   Json stages = Json::array();
                   for (const auto& s : m.stages) stages.push_back({{"learning_rate", s.learning_rate}, {"tree", encode(s.tree)}});
                   j["stages"] = std::move(stages);
                 },
                 [&](const KnnModel& m) {
                   j["k"] = m.k;
                   j["weighting"] = m.weighting == KnnWeighting::Uniform ? "uniform" : "distance";
                   j["rows"] = m.X.rows();
                   j["cols"] = m.X.cols();
                   j["X"] = m.X.data();
                   j["y"] = m.y;
                 },
                 [&](const MlpModel& m) {
                   j["n_inputs"] = m.n_inputs;
                   j["hidden"] = m.hidden;
                   j["w1"] = m.w1;
                   j["b1"] = m.b1;
                   j["w2"] = m.w2;
                   j["b2"] = m.b2;
                   j["y_offset"] = m.y_offset;
                   j["y_scale"] = m.y_scale;
                 },
                 [&](const SvrModel& m) {
                   j["weights"] = m.weights;
                   j["intercept"] = m.intercept;
                   j["epsilon"] = m.epsilon;
                   j["C"] = m.C;
                 },
             },
             model);
  return j;
}

inline TrainedModel decode_trained(const Json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "linreg") {
    return LinearModel{j.at("weights").get<std::vector<double>>(), j.at("intercept").get<double>(),
                       j.at("ridge_lambda").get<double>()};
  }
  if (kind == "tree") return decode_tree(j.at("tree"));
  if (kind == "forest") {
    ForestModel m;
    m.n_features = j.at("n_features").get<std::size_t>();
    m.feature_subsample = j.at("feature_subsample").get<std::size_t>();
    m.bootstrap = j.at("bootstrap").get<bool>();
    m.tree_seeds = j.at("tree_seeds").get<std::vector<std::uint64_t>>();
    for (const auto& t : j.at("trees")) m.trees.push_back(decode_tree(t));
    if (m.trees.empty()) throw Error(Errc::CorruptPayload, "forest without trees");
    for (const auto& t : m.trees) {
      if (t.n_features != m.n_features) throw Error(Errc::CorruptPayload, "forest tree width mismatch");
    }
    return m;
  }
  if (kind == "gbm") {
    GbmModel m;
    m.n_features = j.at("n_features").get<std::size_t>();
    m.initial = j.at("initial").get<double>();
    for (const auto& s : j.at("stages")) {
      m.stages.push_back({decode_tree(s.at("tree")), s.at("learning_rate").get<double>()});
      if (m.stages.back().tree.n_features != m.n_features) throw Error(Errc::CorruptPayload, "gbm stage width mismatch");
    }
    return m;
  }
  if (kind == "knn") {
    KnnModel m;
    m.k = j.at("k").get<std::size_t>();
    m.weighting = j.at("weighting").get<std::string>() == "uniform" ? KnnWeighting::Uniform : KnnWeighting::InverseDistance;
    m.X = Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(), j.at("X").get<std::vector<double>>());
    m.y = j.at("y").get<std::vector<double>>();
    if (m.y.size() != m.X.rows() || m.k < 1 || m.k > m.X.rows()) throw Error(Errc::CorruptPayload, "knn payload shape");
    return m;
  }
  if (kind == "mlp") {
    MlpModel m;
    m.n_inputs = j.at("n_inputs").get<std::size_t>();
    m.hidden = j.at("hidden").get<std::size_t>();
    m.w1 = j.at("w1").get<std::vector<double>>();
    m.b1 = j.at("b1").get<std::vector<double>>();
    m.w2 = j.at("w2").get<std::vector<double>>();
    m.b2 = j.at("b2").get<double>();
    m.y_offset = j.at("y_offset").get<double>();
    m.y_scale = j.at("y_scale").get<double>();
    if (m.w1.size() != m.hidden * m.n_inputs || m.b1.size() != m.hidden || m.w2.size() != m.hidden) {
      throw Error(Errc::CorruptPayload, "mlp payload shape");
    }
    return m;
  }
  if (kind == "svr") {
    return SvrModel{j.at("weights").get<std::vector<double>>(), j.at("intercept").get<double>(),
                    j.at("epsilon").get<double>(), j.at("C").get<double>()};
  }
  throw Error(Errc::CorruptPayload, "unknown model kind '" + kind + "'");
}

inline Json encode(const StackConfig& cfg) {
  Json specs = Json::array();
  for (const auto& s : cfg.base_specs) specs.push_back(encode(s));
  return {{"base_specs", specs},
          {"k_folds", cfg.k_folds},
          {"include_original_features", cfg.include_original_features},
          {"seed", cfg.seed}};
}

inline StackConfig decode_stack_config(const Json& j) {
  StackConfig cfg;
  for (const auto& s : j.at("base_specs")) cfg.base_specs.push_back(decode_spec(s));
  cfg.k_folds = j.at("k_folds").get<std::size_t>();
  cfg.include_original_features = j.at("include_original_features").get<bool>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

inline Json encode(const FittedModel& model) {
  if (const auto* t = std::get_if<TrainedModel>(&model)) return encode(*t);
  const auto& e = std::get<StackedEnsemble>(model);
  Json base = Json::array();
  for (const auto& m : e.base_models) base.push_back(encode(m));
  return {{"kind", "stack"},
          {"n_features", e.n_features},
          {"config", encode(e.config)},
          {"base_models", base},
          {"meta", encode(TrainedModel{e.meta})}};
}

inline FittedModel decode_model(const Json& j) {
  if (j.at("kind").get<std::string>() != "stack") return decode_trained(j);
  StackedEnsemble e;
  e.n_features = j.at("n_features").get<std::size_t>();
  e.config = decode_stack_config(j.at("config"));
  for (const auto& m : j.at("base_models")) e.base_models.push_back(decode_trained(m));
  auto meta = decode_trained(j.at("meta"));
  if (!std::holds_alternative<LinearModel>(meta)) throw Error(Errc::CorruptPayload, "meta-learner must be linear");
  e.meta = std::get<LinearModel>(std::move(meta));
  if (e.meta.weights.size() != e.meta_width()) throw Error(Errc::CorruptPayload, "meta-learner width mismatch");
  for (const auto& m : e.base_models) {
    if (input_width(m) != e.n_features) throw Error(Errc::CorruptPayload, "base model width mismatch");
  }
  return e;
}

}  // namespace codec

// Model files ----------------------------------------------------------------

struct ModelBundle {
  FittedModel model;
  FittedPipeline pipeline;
  std::string created_at;  // ISO-8601 UTC
  Json config = Json::object();
};

inline std::string dump_model(const ModelBundle& b) {
  Json j;
  j["magic"] = kModelMagic;
  j["schema_version"] = kModelSchemaVersion;
  j["created_at"] = b.created_at;
  j["pipeline"] = codec::encode(b.pipeline);
  j["model"] = codec::encode(b.model);
  j["config"] = b.config;
  return j.dump(1) + "\n";
}

namespace detail {

/// True when the text opens with {"magic": "SOLR" (whitespace-insensitive).
inline bool has_magic_prefix(std::string_view s) {
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  };
  auto expect = [&](std::string_view tok) {
    skip_ws();
    if (s.substr(i, tok.size()) != tok) return false;
    i += tok.size();
    return true;
  };
  return expect("{") && expect("\"magic\"") && expect(":") && expect("\"SOLR\"");
}

}  // namespace detail

inline ModelBundle parse_model(std::string_view content) {
  if (!detail::has_magic_prefix(content)) throw Error(Errc::BadMagic, "not a SOLR model file");
  Json j;
  try {
    j = Json::parse(content);
  } catch (const Json::exception& e) {
    throw Error(Errc::CorruptPayload, e.what());
  }
  if (!j.is_object() || j.value("magic", "") != kModelMagic) throw Error(Errc::BadMagic, "not a SOLR model file");
  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer()) {
    throw Error(Errc::CorruptPayload, "schema_version missing");
  }
  if (j["schema_version"].get<int>() != kModelSchemaVersion) {
    throw Error(Errc::UnsupportedVersion, "schema_version " + j["schema_version"].dump());
  }
  try {
    ModelBundle b{codec::decode_model(j.at("model")), codec::decode_pipeline(j.at("pipeline")),
                  j.at("created_at").get<std::string>(), j.at("config")};
    if (input_width(b.model) != b.pipeline.output_width()) {
      throw Error(Errc::CorruptPayload, "model width differs from pipeline output width");
    }
    return b;
  } catch (const Json::exception& e) {
    throw Error(Errc::CorruptPayload, e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::CorruptPayload) throw;
    throw Error(Errc::CorruptPayload, e.what());
  }
}

inline void save_model(const ModelBundle& b, const std::filesystem::path& path) {
  write_text_file(path, dump_model(b));
}

inline ModelBundle load_model(const std::filesystem::path& path) {
  return parse_model(read_text_file(path, Errc::IoError));
}

}  // namespace solarcast
