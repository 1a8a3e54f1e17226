#pragma once

#include <cmath>
#include <stdexcept>

#include "massart/core.hpp"

namespace massart {

// Leakage-parameterized convex surrogate: (1-lambda)z for z >= 0, lambda*z
// otherwise. Convex for lambda <= 1/2; positively homogeneous in z.
inline double leaky_relu(double lambda, double z) {
  return z >= 0.0 ? (1.0 - lambda) * z : lambda * z;
}

struct LossConfig {
  double lambda = 0.0;
  double subgrad_at_zero;  // any value in [lambda, 1-lambda] is a subgradient

  explicit LossConfig(double lam) : lambda(lam), subgrad_at_zero(1.0 - lam) {
    validate();
  }
  LossConfig(double lam, double at_zero)
      : lambda(lam), subgrad_at_zero(at_zero) {
    validate();
  }

  void validate() const {
    if (!(lambda >= 0.0) || lambda > 0.5)
      throw std::invalid_argument("loss: lambda must be in [0, 1/2]");
    if (subgrad_at_zero < lambda - 1e-12 ||
        subgrad_at_zero > 1.0 - lambda + 1e-12)
      throw std::invalid_argument(
          "loss: subgradient at zero must lie in [lambda, 1-lambda]");
  }
};

inline double leaky_relu_deriv(const LossConfig &cfg, double z) {
  if (z > 0.0) return 1.0 - cfg.lambda;
  if (z < 0.0) return cfg.lambda;
  return cfg.subgrad_at_zero;
}

inline double sample_loss(const Halfspace &w, const LabeledExample &ex,
                          double lambda) {
  return leaky_relu(lambda, -static_cast<double>(ex.y) * w.score(ex.x));
}

inline double filtered_loss(const Halfspace &w, const LabeledDataset &data,
                            const Filter &filter, double lambda) {
  double acc = 0.0, total = 0.0;
  filter.for_each(data, [&](std::size_t i, double c) {
    acc += c * sample_loss(w, data.examples[i], lambda);
    total += c;
  });
  if (total <= 0.0) throw EmptyRegionError("filtered_loss: empty filter");
  return acc / total;
}

inline Vec filtered_subgradient(const Halfspace &w, const LabeledDataset &data,
                                const Filter &filter, const LossConfig &cfg) {
  Vec g = Vec::Zero(data.dimension);
  double total = 0.0;
  filter.for_each(data, [&](std::size_t i, double c) {
    const auto &ex = data.examples[i];
    const double z = -static_cast<double>(ex.y) * w.score(ex.x);
    g += (c * leaky_relu_deriv(cfg, z) * -static_cast<double>(ex.y)) * ex.x;
    total += c;
  });
  if (total <= 0.0)
    throw EmptyRegionError("filtered_subgradient: empty filter");
  return g / total;
}

inline Vec filtered_subgradient(const Halfspace &w, const LabeledDataset &data,
                                const Filter &filter, double lambda) {
  return filtered_subgradient(w, data, filter, LossConfig(lambda));
}

}  // namespace massart
