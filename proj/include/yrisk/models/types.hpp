#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "yrisk/adam.hpp"
#include "yrisk/error.hpp"

namespace yrisk {

enum class ModelKind : std::uint8_t { LinearSVM, Logistic, DecisionTree, RandomForest, Mlp };

inline std::string_view model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::LinearSVM: return "svm";
    case ModelKind::Logistic: return "logistic";
    case ModelKind::DecisionTree: return "decision_tree";
    case ModelKind::RandomForest: return "random_forest";
    case ModelKind::Mlp: return "ann";
  }
  return "unknown";
}

inline ModelKind parse_model_kind(std::string_view name) {
  if (name == "svm") return ModelKind::LinearSVM;
  if (name == "logistic") return ModelKind::Logistic;
  if (name == "decision_tree" || name == "tree") return ModelKind::DecisionTree;
  if (name == "random_forest" || name == "forest") return ModelKind::RandomForest;
  if (name == "ann" || name == "mlp") return ModelKind::Mlp;
  throw DomainError("unknown model kind: " + std::string(name));
}

struct MlpConfig {
  int input_dim = 4;
  int hidden_units = 7;
  std::string activation = "sigmoid";  // hidden layer; output is always sigmoid
  int epochs = 9;
  AdamConfig adam;
  int batch_size = 32;
  double classification_threshold = 0.5;
};

struct TrainConfig {
  ModelKind kind = ModelKind::Logistic;
  std::uint64_t seed = 0;
  // gradient models
  double learning_rate = 0.1;
  int epochs = 300;
  double l2 = 0.0;
  // tree / forest
  int max_depth = 5;
  int min_split = 2;
  int n_trees = 100;
  bool bootstrap = true;
  int feature_subsample = 0;  // 0 = ceil(sqrt(d))
  // optional min-max scaling of inputs, off by default
  bool normalize = false;
  MlpConfig mlp;
};

inline TrainConfig default_config(ModelKind kind) {
  TrainConfig cfg;
  cfg.kind = kind;
  switch (kind) {
    case ModelKind::LinearSVM:
      cfg.learning_rate = 0.01;
      cfg.epochs = 300;
      cfg.l2 = 1e-3;
      break;
    case ModelKind::Logistic:
      cfg.learning_rate = 0.1;
      cfg.epochs = 300;
      cfg.l2 = 0.0;
      break;
    default:
      break;
  }
  return cfg;
}

struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int label = -1;  // leaf prediction; -1 on internal nodes

  bool is_leaf() const { return left < 0; }
};

struct TreeParams {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct ForestParams {
  std::vector<TreeParams> trees;
};

struct LinearParams {
  std::vector<double> weights;
  double bias = 0.0;
};

struct MlpParams {
  int input_dim = 0;
  int hidden = 0;
  std::string activation;
  std::vector<double> w1;  // hidden x input, row-major
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // hidden
  double b2 = 0.0;
};

struct Scaling {
  bool enabled = false;
  std::vector<double> min;
  std::vector<double> max;
};

struct FittedModel {
  ModelKind kind{};
  std::vector<std::string> feature_ids;
  TrainConfig config;
  std::uint64_t train_seed = 0;
  Scaling scaling;
  std::variant<LinearParams, TreeParams, ForestParams, MlpParams> params;
};

}  // namespace yrisk
