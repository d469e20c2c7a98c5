#include <gtest/gtest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "yrisk/models.hpp"
#include "yrisk/util.hpp"

using namespace yrisk;

namespace {

LabeledMatrix make_matrix(std::vector<std::vector<double>> rows, std::vector<int> labels) {
  LabeledMatrix m;
  m.d = rows.empty() ? 0 : rows.front().size();
  m.n = rows.size();
  m.label_id = "q25";
  for (std::size_t j = 0; j < m.d; ++j) m.feature_ids.push_back("f" + std::to_string(j));
  for (const auto& r : rows) m.x.insert(m.x.end(), r.begin(), r.end());
  m.y = std::move(labels);
  return m;
}

// clusters at +-(2,2); n_pos/n_neg points
LabeledMatrix separable_clusters(int n_pos = 10, int n_neg = 10, double spread = 0.5,
                                 std::uint64_t seed = 11) {
  Rng rng(seed);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < n_pos; ++i) {
    rows.push_back({2.0 + rng.uniform(-spread, spread), 2.0 + rng.uniform(-spread, spread)});
    labels.push_back(1);
  }
  for (int i = 0; i < n_neg; ++i) {
    rows.push_back({-2.0 + rng.uniform(-spread, spread), -2.0 + rng.uniform(-spread, spread)});
    labels.push_back(0);
  }
  return make_matrix(rows, labels);
}

}  // namespace

TEST(Logistic, PerfectTrainF1OnSeparableData) {
  LabeledMatrix data = separable_clusters();
  TrainConfig cfg = default_config(ModelKind::Logistic);
  cfg.epochs = 500;
  FittedModel m = fit(cfg, data);
  auto pred = predict(m, data);
  EXPECT_EQ(pred, data.y);
}

TEST(Logistic, FullBatchLossNonIncreasing) {
  LabeledMatrix data = separable_clusters();
  LinearParams p;
  p.weights.assign(data.d, 0.0);
  double prev = logistic_gradients(p, data, 0.0).loss;
  const double lr = 0.01;
  for (int epoch = 0; epoch < 200; ++epoch) {
    LogisticGradients g = logistic_gradients(p, data, 0.0);
    for (std::size_t j = 0; j < p.weights.size(); ++j) p.weights[j] -= lr * g.d_weights[j];
    p.bias -= lr * g.d_bias;
    double cur = logistic_gradients(p, data, 0.0).loss;
    EXPECT_LE(cur, prev + 1e-12) << "epoch " << epoch;
    prev = cur;
  }
}

TEST(Logistic, GradientMatchesFiniteDifferences) {
  Rng rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 16; ++i) {
      rows.push_back({rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)});
      labels.push_back(static_cast<int>(rng.next_below(2)));
    }
    LabeledMatrix data = make_matrix(rows, labels);
    LinearParams p;
    for (int j = 0; j < 3; ++j) p.weights.push_back(rng.uniform(-1, 1));
    p.bias = rng.uniform(-1, 1);
    double l2 = 0.01;

    LogisticGradients g = logistic_gradients(p, data, l2);
    std::vector<double> analytic = g.d_weights;
    analytic.push_back(g.d_bias);
    std::vector<double> theta = p.weights;
    theta.push_back(p.bias);
    auto loss_at = [&](std::size_t idx, double bump) {
      LinearParams q = p;
      if (idx < q.weights.size())
        q.weights[idx] += bump;
      else
        q.bias += bump;
      return logistic_gradients(q, data, l2).loss;
    };
    double err = oracle::max_gradient_rel_error(analytic, loss_at, theta);
    EXPECT_LT(err, 1e-4) << "trial " << trial;
  }
}

TEST(Logistic, MirroredInputsGiveComplementaryProbabilities) {
  LinearParams p;
  p.weights = {0.7, -1.3};
  p.bias = 0.0;
  FittedModel m;
  m.kind = ModelKind::Logistic;
  m.feature_ids = {"f0", "f1"};
  m.params = p;
  LabeledMatrix x = make_matrix({{1.0, 2.0}, {-1.0, -2.0}}, {0, 0});
  auto probs = predict_proba(m, x);
  EXPECT_NEAR(probs[0] + probs[1], 1.0, 1e-12);
}

TEST(Logistic, ZeroMarginGivesHalf) {
  LinearParams p;
  p.weights = {1.0, 1.0};
  p.bias = -2.0;
  FittedModel m;
  m.kind = ModelKind::Logistic;
  m.feature_ids = {"f0", "f1"};
  m.params = p;
  LabeledMatrix x = make_matrix({{1.0, 1.0}}, {0});
  EXPECT_DOUBLE_EQ(predict_proba(m, x)[0], 0.5);
}

TEST(LinearSvm, NoHingeViolationsOnSeparableClusters) {
  LabeledMatrix data = separable_clusters();
  TrainConfig cfg = default_config(ModelKind::LinearSVM);
  cfg.epochs = 2000;
  cfg.learning_rate = 0.05;
  FittedModel m = fit(cfg, data);
  const auto& p = std::get<LinearParams>(m.params);
  for (std::size_t i = 0; i < data.n; ++i) {
    double s = data.y[i] ? 1.0 : -1.0;
    EXPECT_GE(s * linear_score(p, data.row(i)), 1.0 - 1e-6) << "row " << i;
  }
  EXPECT_EQ(predict(m, data), data.y);
}

TEST(LinearSvm, HeavyRegularizationCollapsesWeights) {
  // unbalanced classes, l2 large (but inside the lr*2*l2 < 1 stability bound):
  // the weights shrink to ~1/l2 and the bias alone decides the class
  LabeledMatrix data = separable_clusters(15, 5);
  TrainConfig cfg = default_config(ModelKind::LinearSVM);
  cfg.l2 = 30.0;
  cfg.epochs = 800;
  FittedModel m = fit(cfg, data);
  const auto& p = std::get<LinearParams>(m.params);
  for (double w : p.weights) EXPECT_NEAR(w, 0.0, 0.05);
  auto pred = predict(m, data);
  for (int v : pred) EXPECT_EQ(v, 1);  // bias-side constant class
}

TEST(LinearSvm, ShiftedInputsWithCompensatingBiasPredictTheSame) {
  LabeledMatrix data = separable_clusters();
  TrainConfig cfg = default_config(ModelKind::LinearSVM);
  cfg.epochs = 300;
  FittedModel m = fit(cfg, data);
  auto base = predict(m, data);

  // shift every input by +1 and compensate through the bias
  FittedModel shifted = m;
  auto& p = std::get<LinearParams>(shifted.params);
  double correction = 0.0;
  for (double w : p.weights) correction += w;
  p.bias -= correction;
  LabeledMatrix moved = data;
  for (auto& v : moved.x) v += 1.0;
  EXPECT_EQ(predict(shifted, moved), base);
}

TEST(LinearSvm, MarginAccessorMatchesScore) {
  LabeledMatrix data = separable_clusters();
  TrainConfig cfg = default_config(ModelKind::LinearSVM);
  FittedModel m = fit(cfg, data);
  const auto& p = std::get<LinearParams>(m.params);
  auto margins = decision_margin(m, data);
  for (std::size_t i = 0; i < data.n; ++i) EXPECT_DOUBLE_EQ(margins[i], linear_score(p, data.row(i)));
}

TEST(GradientModels, SingleClassDataRejected) {
  LabeledMatrix data = make_matrix({{1, 2}, {3, 4}, {5, 6}, {7, 8}}, {1, 1, 1, 1});
  for (ModelKind kind : {ModelKind::Logistic, ModelKind::LinearSVM, ModelKind::Mlp}) {
    TrainConfig cfg = default_config(kind);
    cfg.mlp.input_dim = 2;
    EXPECT_THROW(fit(cfg, data), DataError);
  }
}

TEST(GradientModels, EmptyDataRejected) {
  LabeledMatrix empty;
  empty.d = 2;
  empty.feature_ids = {"f0", "f1"};
  EXPECT_THROW(fit(default_config(ModelKind::Logistic), empty), DomainError);
}
