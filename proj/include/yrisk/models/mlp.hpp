#pragma once

#include <cmath>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "yrisk/activations.hpp"
#include "yrisk/adam.hpp"
#include "yrisk/error.hpp"
#include "yrisk/models/types.hpp"
#include "yrisk/survey.hpp"
#include "yrisk/util.hpp"

namespace yrisk {

// Single hidden layer, sigmoid output: h = act(W1 x + b1), p = sigmoid(w2.h + b2).
inline std::pair<std::vector<double>, double> mlp_forward(const MlpParams& p, std::span<const double> x) {
  if (static_cast<int>(x.size()) != p.input_dim) throw DomainError("mlp_forward: input dimension mismatch");
  const Activation& act = activation_by_name(p.activation);
  std::vector<double> hidden(static_cast<std::size_t>(p.hidden));
  double z2 = p.b2;
  for (int u = 0; u < p.hidden; ++u) {
    double pre = p.b1[static_cast<std::size_t>(u)];
    const double* w_row = p.w1.data() + static_cast<std::size_t>(u) * static_cast<std::size_t>(p.input_dim);
    for (int j = 0; j < p.input_dim; ++j) pre += w_row[j] * x[static_cast<std::size_t>(j)];
    double h = act.f(pre);
    hidden[static_cast<std::size_t>(u)] = h;
    z2 += p.w2[static_cast<std::size_t>(u)] * h;
  }
  return {std::move(hidden), sigmoid(z2)};
}

namespace detail {

inline std::size_t mlp_param_count(int input_dim, int hidden) {
  return static_cast<std::size_t>(hidden) * static_cast<std::size_t>(input_dim) +
         static_cast<std::size_t>(hidden) + static_cast<std::size_t>(hidden) + 1;
}

// flat layout: [w1, b1, w2, b2]
inline std::vector<double> mlp_pack(const MlpParams& p) {
  std::vector<double> theta;
  theta.reserve(mlp_param_count(p.input_dim, p.hidden));
  theta.insert(theta.end(), p.w1.begin(), p.w1.end());
  theta.insert(theta.end(), p.b1.begin(), p.b1.end());
  theta.insert(theta.end(), p.w2.begin(), p.w2.end());
  theta.push_back(p.b2);
  return theta;
}

inline void mlp_unpack(std::span<const double> theta, MlpParams& p) {
  std::size_t w1n = static_cast<std::size_t>(p.hidden) * static_cast<std::size_t>(p.input_dim);
  std::size_t h = static_cast<std::size_t>(p.hidden);
  p.w1.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(w1n));
  p.b1.assign(theta.begin() + static_cast<std::ptrdiff_t>(w1n),
              theta.begin() + static_cast<std::ptrdiff_t>(w1n + h));
  p.w2.assign(theta.begin() + static_cast<std::ptrdiff_t>(w1n + h),
              theta.begin() + static_cast<std::ptrdiff_t>(w1n + 2 * h));
  p.b2 = theta[w1n + 2 * h];
}

}  // namespace detail

struct MlpBatchGradients {
  std::vector<double> grad;  // same flat layout as the packed parameters
  double loss = 0.0;
};

// Exact analytic gradient of the mean binary cross-entropy over the batch.
inline MlpBatchGradients mlp_gradients(const MlpParams& p, const LabeledMatrix& data,
                                       std::span<const int> batch_rows) {
  if (batch_rows.empty()) throw DomainError("mlp_gradients: empty batch");
  const Activation& act = activation_by_name(p.activation);
  const std::size_t w1n = static_cast<std::size_t>(p.hidden) * static_cast<std::size_t>(p.input_dim);
  const std::size_t h = static_cast<std::size_t>(p.hidden);

  MlpBatchGradients out;
  out.grad.assign(detail::mlp_param_count(p.input_dim, p.hidden), 0.0);
  std::span<double> g_w1(out.grad.data(), w1n);
  std::span<double> g_b1(out.grad.data() + w1n, h);
  std::span<double> g_w2(out.grad.data() + w1n + h, h);
  double& g_b2 = out.grad[w1n + 2 * h];

  const double inv_b = 1.0 / static_cast<double>(batch_rows.size());
  std::vector<double> pre(h), hid(h);
  for (int r : batch_rows) {
    auto x = data.row(static_cast<std::size_t>(r));
    double z2 = p.b2;
    for (std::size_t u = 0; u < h; ++u) {
      double s = p.b1[u];
      const double* w_row = p.w1.data() + u * static_cast<std::size_t>(p.input_dim);
      for (int j = 0; j < p.input_dim; ++j) s += w_row[j] * x[static_cast<std::size_t>(j)];
      pre[u] = s;
      hid[u] = act.f(s);
      z2 += p.w2[u] * hid[u];
    }
    double prob = sigmoid(z2);
    double y = static_cast<double>(data.y[static_cast<std::size_t>(r)]);

    double d_z2 = (prob - y) * inv_b;  // d(mean BCE)/d z2
    for (std::size_t u = 0; u < h; ++u) {
      g_w2[u] += d_z2 * hid[u];
      double d_pre = d_z2 * p.w2[u] * act.df(pre[u]);
      g_b1[u] += d_pre;
      double* gw_row = g_w1.data() + u * static_cast<std::size_t>(p.input_dim);
      for (int j = 0; j < p.input_dim; ++j) gw_row[j] += d_pre * x[static_cast<std::size_t>(j)];
    }
    g_b2 += d_z2;

    const double eps = 1e-12;
    double pc = std::min(std::max(prob, eps), 1.0 - eps);
    out.loss -= inv_b * (y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc));
  }
  return out;
}

inline MlpParams init_mlp(const MlpConfig& cfg, std::uint64_t seed) {
  MlpParams p;
  p.input_dim = cfg.input_dim;
  p.hidden = cfg.hidden_units;
  p.activation = cfg.activation;
  Rng rng(mix_seed(seed, "mlp-init"));
  double s1 = 1.0 / std::sqrt(static_cast<double>(cfg.input_dim));
  double s2 = 1.0 / std::sqrt(static_cast<double>(cfg.hidden_units));
  p.w1.resize(static_cast<std::size_t>(cfg.hidden_units) * static_cast<std::size_t>(cfg.input_dim));
  for (auto& w : p.w1) w = rng.uniform(-s1, s1);
  p.b1.assign(static_cast<std::size_t>(cfg.hidden_units), 0.0);
  p.w2.resize(static_cast<std::size_t>(cfg.hidden_units));
  for (auto& w : p.w2) w = rng.uniform(-s2, s2);
  p.b2 = 0.0;
  return p;
}

// Mini-batch Adam over shuffled epochs; the trailing short batch is kept.
inline MlpParams train_mlp(const TrainConfig& cfg, const LabeledMatrix& data) {
  const MlpConfig& mc = cfg.mlp;
  if (mc.input_dim != static_cast<int>(data.d))
    throw DomainError("train_mlp: input_dim does not match the feature count");
  activation_by_name(mc.activation);  // validate early
  if (mc.hidden_units < 1) throw DomainError("train_mlp: hidden_units must be >= 1");

  MlpParams p = init_mlp(mc, cfg.seed);
  std::vector<double> theta = detail::mlp_pack(p);
  AdamState adam(theta.size(), mc.adam);
  Rng shuffle_rng(mix_seed(cfg.seed, "mlp-shuffle"));

  std::vector<int> index(data.n);
  std::iota(index.begin(), index.end(), 0);
  const std::size_t batch = static_cast<std::size_t>(std::max(mc.batch_size, 1));
  for (int epoch = 0; epoch < mc.epochs; ++epoch) {
    shuffle_rng.shuffle(index);
    for (std::size_t start = 0; start < index.size(); start += batch) {
      std::size_t len = std::min(batch, index.size() - start);
      detail::mlp_unpack(theta, p);
      MlpBatchGradients g = mlp_gradients(p, data, {index.data() + start, len});
      adam_step(adam, theta, g.grad);
    }
  }
  detail::mlp_unpack(theta, p);
  return p;
}

}  // namespace yrisk
