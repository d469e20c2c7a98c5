#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "yrisk/activations.hpp"
#include "yrisk/error.hpp"
#include "yrisk/models/types.hpp"
#include "yrisk/survey.hpp"

namespace yrisk {

inline double linear_score(const LinearParams& p, std::span<const double> row) {
  double s = p.bias;
  for (std::size_t j = 0; j < p.weights.size(); ++j) s += p.weights[j] * row[j];
  return s;
}

// Gradient of mean binary cross-entropy (plus optional L2 on the weights)
// for sigmoid(w.x + b). Shared by the trainer and the gradient checks.
struct LogisticGradients {
  std::vector<double> d_weights;
  double d_bias = 0.0;
  double loss = 0.0;
};

inline LogisticGradients logistic_gradients(const LinearParams& p, const LabeledMatrix& data, double l2) {
  LogisticGradients g;
  g.d_weights.assign(p.weights.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(data.n);
  for (std::size_t i = 0; i < data.n; ++i) {
    auto row = data.row(i);
    double prob = sigmoid(linear_score(p, row));
    double y = static_cast<double>(data.y[i]);
    double delta = (prob - y) * inv_n;
    for (std::size_t j = 0; j < row.size(); ++j) g.d_weights[j] += delta * row[j];
    g.d_bias += delta;
    const double eps = 1e-12;
    double pc = std::min(std::max(prob, eps), 1.0 - eps);
    g.loss -= inv_n * (y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc));
  }
  for (std::size_t j = 0; j < p.weights.size(); ++j) {
    g.d_weights[j] += 2.0 * l2 * p.weights[j];
    g.loss += l2 * p.weights[j] * p.weights[j];
  }
  return g;
}

// Full-batch gradient descent on binary cross-entropy from a zero start.
inline LinearParams train_logistic(const TrainConfig& cfg, const LabeledMatrix& data) {
  LinearParams p;
  p.weights.assign(data.d, 0.0);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    LogisticGradients g = logistic_gradients(p, data, cfg.l2);
    for (std::size_t j = 0; j < p.weights.size(); ++j) p.weights[j] -= cfg.learning_rate * g.d_weights[j];
    p.bias -= cfg.learning_rate * g.d_bias;
  }
  return p;
}

// Mean hinge loss max(0, 1 - s(w.x + b)) + l2 ||w||^2 with labels in {-1,+1}.
struct HingeGradients {
  std::vector<double> d_weights;
  double d_bias = 0.0;
  double loss = 0.0;
};

inline HingeGradients hinge_gradients(const LinearParams& p, const LabeledMatrix& data, double l2) {
  HingeGradients g;
  g.d_weights.assign(p.weights.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(data.n);
  for (std::size_t i = 0; i < data.n; ++i) {
    auto row = data.row(i);
    double s = data.y[i] ? 1.0 : -1.0;
    double margin = s * linear_score(p, row);
    if (margin < 1.0) {
      for (std::size_t j = 0; j < row.size(); ++j) g.d_weights[j] -= inv_n * s * row[j];
      g.d_bias -= inv_n * s;
      g.loss += inv_n * (1.0 - margin);
    }
  }
  for (std::size_t j = 0; j < p.weights.size(); ++j) {
    g.d_weights[j] += 2.0 * l2 * p.weights[j];
    g.loss += l2 * p.weights[j] * p.weights[j];
  }
  return g;
}

// Epoch-wise subgradient descent with a constant learning rate.
inline LinearParams train_linear_svm(const TrainConfig& cfg, const LabeledMatrix& data) {
  LinearParams p;
  p.weights.assign(data.d, 0.0);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    HingeGradients g = hinge_gradients(p, data, cfg.l2);
    for (std::size_t j = 0; j < p.weights.size(); ++j) p.weights[j] -= cfg.learning_rate * g.d_weights[j];
    p.bias -= cfg.learning_rate * g.d_bias;
  }
  return p;
}

}  // namespace yrisk
