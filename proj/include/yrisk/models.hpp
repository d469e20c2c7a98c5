#pragma once

#include <cmath>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "yrisk/error.hpp"
#include "yrisk/models/forest.hpp"
#include "yrisk/models/linear.hpp"
#include "yrisk/models/mlp.hpp"
#include "yrisk/models/tree.hpp"
#include "yrisk/models/types.hpp"
#include "yrisk/survey.hpp"

namespace yrisk {

inline constexpr int kModelSchemaVersion = 1;

namespace detail {

inline bool has_both_classes(const LabeledMatrix& data) {
  bool any0 = false, any1 = false;
  for (int v : data.y) (v ? any1 : any0) = true;
  return any0 && any1;
}

inline Scaling fit_scaling(const LabeledMatrix& data) {
  Scaling s;
  s.enabled = true;
  s.min.assign(data.d, 0.0);
  s.max.assign(data.d, 0.0);
  for (std::size_t j = 0; j < data.d; ++j) {
    double lo = data.at(0, j), hi = data.at(0, j);
    for (std::size_t i = 1; i < data.n; ++i) {
      lo = std::min(lo, data.at(i, j));
      hi = std::max(hi, data.at(i, j));
    }
    s.min[j] = lo;
    s.max[j] = hi;
  }
  return s;
}

inline LabeledMatrix apply_scaling(const Scaling& s, const LabeledMatrix& data) {
  if (!s.enabled) return data;
  LabeledMatrix out = data;
  for (std::size_t j = 0; j < out.d; ++j) {
    double range = s.max[j] - s.min[j];
    for (std::size_t i = 0; i < out.n; ++i)
      out.x[i * out.d + j] = range > 0.0 ? (out.x[i * out.d + j] - s.min[j]) / range : 0.0;
  }
  return out;
}

template <class T>
void check_finite(const std::vector<T>& values) {
  for (double v : values)
    if (!std::isfinite(v)) throw DataError("fit produced non-finite parameters");
}

inline void check_model_finite(const FittedModel& m) {
  if (const auto* lin = std::get_if<LinearParams>(&m.params)) {
    check_finite(lin->weights);
    if (!std::isfinite(lin->bias)) throw DataError("fit produced non-finite parameters");
  } else if (const auto* mlp = std::get_if<MlpParams>(&m.params)) {
    check_finite(mlp->w1);
    check_finite(mlp->b1);
    check_finite(mlp->w2);
    if (!std::isfinite(mlp->b2)) throw DataError("fit produced non-finite parameters");
  }
  // tree thresholds come straight from finite feature values
}

}  // namespace detail

// Trains one model. Deterministic: the same (cfg, data) always yields
// bit-identical parameters.
inline FittedModel fit(const TrainConfig& cfg, const LabeledMatrix& data) {
  if (data.n == 0) throw DomainError("fit: empty training data");
  bool gradient_kind =
      cfg.kind == ModelKind::Logistic || cfg.kind == ModelKind::LinearSVM || cfg.kind == ModelKind::Mlp;
  if (gradient_kind && !detail::has_both_classes(data))
    throw DataError("fit: training data holds a single class");

  FittedModel m;
  m.kind = cfg.kind;
  m.feature_ids = data.feature_ids;
  m.config = cfg;
  m.train_seed = cfg.seed;
  if (cfg.normalize) m.scaling = detail::fit_scaling(data);
  const LabeledMatrix scaled = detail::apply_scaling(m.scaling, data);

  switch (cfg.kind) {
    case ModelKind::Logistic:
      m.params = train_logistic(cfg, scaled);
      break;
    case ModelKind::LinearSVM:
      m.params = train_linear_svm(cfg, scaled);
      break;
    case ModelKind::DecisionTree: {
      std::vector<int> rows(scaled.n);
      for (std::size_t i = 0; i < scaled.n; ++i) rows[i] = static_cast<int>(i);
      m.params = train_tree(scaled, std::move(rows), cfg.max_depth, cfg.min_split);
      break;
    }
    case ModelKind::RandomForest:
      m.params = train_forest(cfg, scaled);
      break;
    case ModelKind::Mlp:
      m.params = train_mlp(cfg, scaled);
      break;
  }
  detail::check_model_finite(m);
  return m;
}

namespace detail {

inline void check_features(const FittedModel& m, const LabeledMatrix& data) {
  if (m.feature_ids != data.feature_ids)
    throw SchemaError("predict: feature ids do not match the fitted model");
}

}  // namespace detail

// Probability of the positive class; defined for logistic, MLP and forest.
inline std::vector<double> predict_proba(const FittedModel& m, const LabeledMatrix& data) {
  detail::check_features(m, data);
  const LabeledMatrix scaled = detail::apply_scaling(m.scaling, data);
  std::vector<double> probs(scaled.n);
  switch (m.kind) {
    case ModelKind::Logistic: {
      const auto& p = std::get<LinearParams>(m.params);
      for (std::size_t i = 0; i < scaled.n; ++i) probs[i] = sigmoid(linear_score(p, scaled.row(i)));
      break;
    }
    case ModelKind::RandomForest: {
      const auto& p = std::get<ForestParams>(m.params);
      for (std::size_t i = 0; i < scaled.n; ++i) probs[i] = forest_vote_fraction(p, scaled.row(i));
      break;
    }
    case ModelKind::Mlp: {
      const auto& p = std::get<MlpParams>(m.params);
      for (std::size_t i = 0; i < scaled.n; ++i) probs[i] = mlp_forward(p, scaled.row(i)).second;
      break;
    }
    default:
      throw UnsupportedError("predict_proba: not defined for " + std::string(model_kind_name(m.kind)));
  }
  return probs;
}

// Signed distance from the separating hyperplane; SVM only.
inline std::vector<double> decision_margin(const FittedModel& m, const LabeledMatrix& data) {
  if (m.kind != ModelKind::LinearSVM)
    throw UnsupportedError("decision_margin: only defined for svm");
  detail::check_features(m, data);
  const LabeledMatrix scaled = detail::apply_scaling(m.scaling, data);
  const auto& p = std::get<LinearParams>(m.params);
  std::vector<double> margins(scaled.n);
  for (std::size_t i = 0; i < scaled.n; ++i) margins[i] = linear_score(p, scaled.row(i));
  return margins;
}

// Binary labels; probabilistic kinds threshold strictly above the configured
// classification threshold.
inline std::vector<int> predict(const FittedModel& m, const LabeledMatrix& data) {
  detail::check_features(m, data);
  std::vector<int> labels(data.n);
  switch (m.kind) {
    case ModelKind::LinearSVM: {
      auto margins = decision_margin(m, data);
      for (std::size_t i = 0; i < data.n; ++i) labels[i] = margins[i] > 0.0 ? 1 : 0;
      break;
    }
    case ModelKind::DecisionTree: {
      const LabeledMatrix scaled = detail::apply_scaling(m.scaling, data);
      const auto& p = std::get<TreeParams>(m.params);
      for (std::size_t i = 0; i < scaled.n; ++i) labels[i] = tree_predict_row(p, scaled.row(i));
      break;
    }
    default: {
      double threshold = m.kind == ModelKind::Mlp ? m.config.mlp.classification_threshold : 0.5;
      auto probs = predict_proba(m, data);
      for (std::size_t i = 0; i < data.n; ++i) labels[i] = probs[i] > threshold ? 1 : 0;
      break;
    }
  }
  return labels;
}

// ---- JSON serialization -------------------------------------------------

inline nlohmann::json mlp_config_to_json(const MlpConfig& c) {
  return {{"input_dim", c.input_dim},
          {"hidden_units", c.hidden_units},
          {"activation", c.activation},
          {"epochs", c.epochs},
          {"adam",
           {{"beta1", c.adam.beta1},
            {"beta2", c.adam.beta2},
            {"epsilon", c.adam.epsilon},
            {"learning_rate", c.adam.learning_rate}}},
          {"batch_size", c.batch_size},
          {"classification_threshold", c.classification_threshold}};
}

inline MlpConfig mlp_config_from_json(const nlohmann::json& j) {
  MlpConfig c;
  c.input_dim = j.at("input_dim").get<int>();
  c.hidden_units = j.at("hidden_units").get<int>();
  c.activation = j.at("activation").get<std::string>();
  c.epochs = j.at("epochs").get<int>();
  const auto& a = j.at("adam");
  c.adam.beta1 = a.at("beta1").get<double>();
  c.adam.beta2 = a.at("beta2").get<double>();
  c.adam.epsilon = a.at("epsilon").get<double>();
  c.adam.learning_rate = a.at("learning_rate").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.classification_threshold = j.at("classification_threshold").get<double>();
  return c;
}

inline nlohmann::json train_config_to_json(const TrainConfig& c) {
  return {{"kind", std::string(model_kind_name(c.kind))},
          {"seed", c.seed},
          {"learning_rate", c.learning_rate},
          {"epochs", c.epochs},
          {"l2", c.l2},
          {"max_depth", c.max_depth},
          {"min_split", c.min_split},
          {"n_trees", c.n_trees},
          {"bootstrap", c.bootstrap},
          {"feature_subsample", c.feature_subsample},
          {"normalize", c.normalize},
          {"mlp", mlp_config_to_json(c.mlp)}};
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.kind = parse_model_kind(j.at("kind").get<std::string>());
  c.seed = j.at("seed").get<std::uint64_t>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.l2 = j.at("l2").get<double>();
  c.max_depth = j.at("max_depth").get<int>();
  c.min_split = j.at("min_split").get<int>();
  c.n_trees = j.at("n_trees").get<int>();
  c.bootstrap = j.at("bootstrap").get<bool>();
  c.feature_subsample = j.at("feature_subsample").get<int>();
  c.normalize = j.at("normalize").get<bool>();
  c.mlp = mlp_config_from_json(j.at("mlp"));
  return c;
}

namespace detail {

inline nlohmann::json tree_to_json(const TreeParams& t) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : t.nodes)
    nodes.push_back({{"feature", n.feature},
                     {"threshold", n.threshold},
                     {"left", n.left},
                     {"right", n.right},
                     {"label", n.label}});
  return nodes;
}

inline TreeParams tree_from_json(const nlohmann::json& j) {
  TreeParams t;
  for (const auto& n : j) {
    TreeNode node;
    node.feature = n.at("feature").get<int>();
    node.threshold = n.at("threshold").get<double>();
    node.left = n.at("left").get<int>();
    node.right = n.at("right").get<int>();
    node.label = n.at("label").get<int>();
    t.nodes.push_back(node);
  }
  return t;
}

}  // namespace detail

inline nlohmann::json model_to_json(const FittedModel& m) {
  nlohmann::json j{{"version", kModelSchemaVersion},
                   {"kind", std::string(model_kind_name(m.kind))},
                   {"feature_ids", m.feature_ids},
                   {"config", train_config_to_json(m.config)},
                   {"seed", m.train_seed}};
  if (m.scaling.enabled) j["scaling"] = {{"min", m.scaling.min}, {"max", m.scaling.max}};
  nlohmann::json params;
  switch (m.kind) {
    case ModelKind::Logistic:
    case ModelKind::LinearSVM: {
      const auto& p = std::get<LinearParams>(m.params);
      params = {{"weights", p.weights}, {"bias", p.bias}};
      break;
    }
    case ModelKind::DecisionTree:
      params = {{"nodes", detail::tree_to_json(std::get<TreeParams>(m.params))}};
      break;
    case ModelKind::RandomForest: {
      nlohmann::json trees = nlohmann::json::array();
      for (const auto& t : std::get<ForestParams>(m.params).trees) trees.push_back(detail::tree_to_json(t));
      params = {{"trees", trees}};
      break;
    }
    case ModelKind::Mlp: {
      const auto& p = std::get<MlpParams>(m.params);
      params = {{"input_dim", p.input_dim}, {"hidden", p.hidden},       {"activation", p.activation},
                {"w1", p.w1},               {"b1", p.b1},               {"w2", p.w2},
                {"b2", p.b2}};
      break;
    }
  }
  j["parameters"] = std::move(params);
  return j;
}

inline FittedModel model_from_json(const nlohmann::json& j) {
  if (j.at("version").get<int>() != kModelSchemaVersion)
    throw SchemaError("unsupported model schema version");
  FittedModel m;
  m.kind = parse_model_kind(j.at("kind").get<std::string>());
  m.feature_ids = j.at("feature_ids").get<std::vector<std::string>>();
  m.config = train_config_from_json(j.at("config"));
  m.train_seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("scaling")) {
    m.scaling.enabled = true;
    m.scaling.min = j["scaling"].at("min").get<std::vector<double>>();
    m.scaling.max = j["scaling"].at("max").get<std::vector<double>>();
  }
  const auto& params = j.at("parameters");
  switch (m.kind) {
    case ModelKind::Logistic:
    case ModelKind::LinearSVM: {
      LinearParams p;
      p.weights = params.at("weights").get<std::vector<double>>();
      p.bias = params.at("bias").get<double>();
      m.params = std::move(p);
      break;
    }
    case ModelKind::DecisionTree:
      m.params = detail::tree_from_json(params.at("nodes"));
      break;
    case ModelKind::RandomForest: {
      ForestParams f;
      for (const auto& t : params.at("trees")) f.trees.push_back(detail::tree_from_json(t));
      m.params = std::move(f);
      break;
    }
    case ModelKind::Mlp: {
      MlpParams p;
      p.input_dim = params.at("input_dim").get<int>();
      p.hidden = params.at("hidden").get<int>();
      p.activation = params.at("activation").get<std::string>();
      p.w1 = params.at("w1").get<std::vector<double>>();
      p.b1 = params.at("b1").get<std::vector<double>>();
      p.w2 = params.at("w2").get<std::vector<double>>();
      p.b2 = params.at("b2").get<double>();
      m.params = std::move(p);
      break;
    }
  }
  return m;
}

}  // namespace yrisk
