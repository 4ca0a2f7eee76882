// Combined activation A(x) = alpha * sigmoid(x) + beta * (a * x + b): a mix
// of the sigmoid and its linear approximation.
#pragma once

#include <cmath>

namespace ernn {

struct ActivationSpec {
  double alpha = 0.5;
  double beta = 0.5;
  double a = 0.2;  // linear slope
  double b = 0.5;  // linear intercept
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double activation(const ActivationSpec& spec, double x) {
  return spec.alpha * sigmoid(x) + spec.beta * (spec.a * x + spec.b);
}

inline double activation_derivative(const ActivationSpec& spec, double x) {
  double s = sigmoid(x);
  return spec.alpha * s * (1.0 - s) + spec.beta * spec.a;
}

}  // namespace ernn
