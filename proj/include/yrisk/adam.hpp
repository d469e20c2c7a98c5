#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "yrisk/error.hpp"

namespace yrisk {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double learning_rate = 0.001;
};

struct AdamState {
  std::uint64_t step = 0;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  AdamConfig hyper;

  AdamState(std::size_t n_params, AdamConfig cfg)
      : first_moment(n_params, 0.0), second_moment(n_params, 0.0), hyper(cfg) {}
};

// One bias-corrected Adam update, in place:
//   m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2
//   theta <- theta - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
inline void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size())
    throw DomainError("adam_step: shape mismatch");
  state.step += 1;
  const double b1 = state.hyper.beta1;
  const double b2 = state.hyper.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    double g = grads[i];
    state.first_moment[i] = b1 * state.first_moment[i] + (1.0 - b1) * g;
    state.second_moment[i] = b2 * state.second_moment[i] + (1.0 - b2) * g * g;
    double m_hat = state.first_moment[i] / correction1;
    double v_hat = state.second_moment[i] / correction2;
    params[i] -= state.hyper.learning_rate * m_hat / (std::sqrt(v_hat) + state.hyper.epsilon);
  }
}

}  // namespace yrisk
