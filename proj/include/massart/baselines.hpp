#pragma once

#include <cmath>
#include <stdexcept>

#include "massart/loss.hpp"

namespace massart {

struct BaselineConfig {
  std::size_t iters = 200;
  double step = 1.0;
  double l2_strength = 0.02;

  void validate() const {
    if (iters == 0 || !(step > 0.0) || l2_strength < 0.0)
      throw std::invalid_argument("baseline: invalid configuration");
  }
};

// Full-batch gradient descent on the l2-regularized logistic loss with an
// intercept. Steps that fail to decrease the objective are halved, which
// keeps the trajectory monotone.
inline Halfspace logistic_regression(const LabeledDataset &data,
                                     const BaselineConfig &cfg) {
  cfg.validate();
  if (data.empty())
    throw std::invalid_argument("logistic_regression: empty dataset");
  const double n = static_cast<double>(data.size());
  Vec w = Vec::Zero(data.dimension);
  double b = 0.0;

  auto objective = [&](const Vec &wv, double bv) {
    double acc = 0.0;
    for (const auto &ex : data.examples) {
      const double m = static_cast<double>(ex.y) * (wv.dot(ex.x) + bv);
      // log(1 + exp(-m)) without overflow
      acc += m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
    }
    return acc / n + 0.5 * cfg.l2_strength * wv.squaredNorm();
  };

  double step = cfg.step;
  double prev = objective(w, b);
  for (std::size_t t = 0; t < cfg.iters; ++t) {
    Vec gw = cfg.l2_strength * w;
    double gb = 0.0;
    for (const auto &ex : data.examples) {
      const double m = static_cast<double>(ex.y) * (w.dot(ex.x) + b);
      const double s = -static_cast<double>(ex.y) / (1.0 + std::exp(m));
      gw += (s / n) * ex.x;
      gb += s / n;
    }
    while (true) {
      Vec w_next = w - step * gw;
      double b_next = b - step * gb;
      const double val = objective(w_next, b_next);
      if (val <= prev + 1e-15 || step < 1e-12) {
        w = std::move(w_next);
        b = b_next;
        prev = val;
        break;
      }
      step *= 0.5;
    }
    step *= 1.2;  // regrow after successful steps; halving keeps it monotone
  }
  return Halfspace(std::move(w), b);
}

// Projected gradient descent on the unfiltered surrogate loss with the
// leakage pinned at eta; the fixed-surrogate baseline.
inline Halfspace leakyrelu_gd_plain(const LabeledDataset &data, double eta,
                                    const BaselineConfig &cfg) {
  cfg.validate();
  if (data.empty())
    throw std::invalid_argument("leakyrelu_gd_plain: empty dataset");
  LossConfig loss_cfg(eta);
  Vec w = Vec::Zero(data.dimension);
  Halfspace h(w);
  for (std::size_t t = 1; t <= cfg.iters; ++t) {
    Vec g = filtered_subgradient(h, data, Filter::all(), loss_cfg);
    Vec next = h.w - cfg.step * g;
    const double nn = next.norm();
    if (nn > 1.0) next /= nn;
    h.w = std::move(next);
  }
  return h;
}

// Majority label; ties resolve to +1.
inline int constant_best(const LabeledDataset &data) {
  if (data.empty()) throw std::invalid_argument("constant_best: empty dataset");
  double plus = 0.0;
  for (const auto &ex : data.examples) plus += ex.y == 1 ? 1.0 : 0.0;
  return plus >= static_cast<double>(data.size()) / 2.0 ? 1 : -1;
}

}  // namespace massart
