#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "yrisk/error.hpp"

namespace yrisk {

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

struct Activation {
  std::string name;
  double (*f)(double);
  double (*df)(double);
};

namespace act {

inline double sigmoid_f(double x) { return sigmoid(x); }
inline double sigmoid_df(double x) {
  double s = sigmoid(x);
  return s * (1.0 - s);
}

inline double tanh_f(double x) { return std::tanh(x); }
inline double tanh_df(double x) {
  double t = std::tanh(x);
  return 1.0 - t * t;
}

inline double relu_f(double x) { return x > 0.0 ? x : 0.0; }
inline double relu_df(double x) { return x > 0.0 ? 1.0 : 0.0; }

inline constexpr double kLeakySlope = 0.01;
inline double leaky_relu_f(double x) { return x > 0.0 ? x : kLeakySlope * x; }
inline double leaky_relu_df(double x) { return x > 0.0 ? 1.0 : kLeakySlope; }

inline double elu_f(double x) { return x > 0.0 ? x : std::expm1(x); }
inline double elu_df(double x) { return x > 0.0 ? 1.0 : std::exp(x); }

inline constexpr double kSeluLambda = 1.0507009873554804934193349852946;
inline constexpr double kSeluAlpha = 1.6732632423543772848170429916717;
inline double selu_f(double x) { return kSeluLambda * (x > 0.0 ? x : kSeluAlpha * std::expm1(x)); }
inline double selu_df(double x) { return kSeluLambda * (x > 0.0 ? 1.0 : kSeluAlpha * std::exp(x)); }

inline double softplus_f(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
inline double softplus_df(double x) { return sigmoid(x); }

inline double softsign_f(double x) { return x / (1.0 + std::fabs(x)); }
inline double softsign_df(double x) {
  double d = 1.0 + std::fabs(x);
  return 1.0 / (d * d);
}

inline double linear_f(double x) { return x; }
inline double linear_df(double) { return 1.0; }

}  // namespace act

// The nine hidden-layer activations the tuner sweeps, in canonical order.
inline const std::vector<Activation>& activation_set() {
  static const std::vector<Activation> kSet = {
      {"sigmoid", act::sigmoid_f, act::sigmoid_df},
      {"tanh", act::tanh_f, act::tanh_df},
      {"relu", act::relu_f, act::relu_df},
      {"leaky_relu", act::leaky_relu_f, act::leaky_relu_df},
      {"elu", act::elu_f, act::elu_df},
      {"selu", act::selu_f, act::selu_df},
      {"softplus", act::softplus_f, act::softplus_df},
      {"softsign", act::softsign_f, act::softsign_df},
      {"linear", act::linear_f, act::linear_df},
  };
  return kSet;
}

inline const Activation& activation_by_name(std::string_view name) {
  for (const auto& a : activation_set())
    if (a.name == name) return a;
  throw DomainError("unknown activation: " + std::string(name));
}

}  // namespace yrisk
