#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "massart/core.hpp"

namespace massart {

struct GDConfig {
  enum class StepRule { inv_sqrt_t, regret_scaled, constant };
  std::size_t T = 1;
  StepRule step_rule = StepRule::inv_sqrt_t;
  double D = 2.0;  // diameter bound of the constraint set
  double G = 1.0;  // gradient norm bound
  double step = 0.05;  // used by StepRule::constant

  double step_at(std::size_t t) const {
    switch (step_rule) {
      case StepRule::inv_sqrt_t:
        return 1.0 / std::sqrt(static_cast<double>(t));
      case StepRule::regret_scaled:
        return D / (G * std::sqrt(static_cast<double>(t)));
      case StepRule::constant:
        return step;
    }
    return 1.0;
  }

  void validate() const {
    if (T < 1) throw std::invalid_argument("gd: T must be >= 1");
    if (!(D > 0.0) || !(G > 0.0))
      throw std::invalid_argument("gd: D and G must be positive");
  }
};

inline Vec projected_gd_step(const Vec &w, const Vec &g, std::size_t t,
                             const GDConfig &cfg) {
  if (t < 1) throw std::invalid_argument("projected_gd_step: t must be >= 1");
  Vec next = w - cfg.step_at(t) * g;
  const double n = next.norm();
  if (n > 1.0) next /= n;
  return next;
}

// Exponentiated-gradient state over the 2d lifted coordinates (positive and
// negative copy per coordinate); decodes to w = w+ - w- in the l1 ball.
struct MirrorState {
  std::vector<double> weights;  // size 2d, nonnegative, sum <= 1

  static MirrorState uniform(Eigen::Index d) {
    MirrorState s;
    s.weights.assign(static_cast<std::size_t>(2 * d),
                     1.0 / static_cast<double>(2 * d));
    return s;
  }

  Eigen::Index dim() const {
    return static_cast<Eigen::Index>(weights.size() / 2);
  }

  Vec decode() const {
    const auto d = dim();
    Vec w(d);
    for (Eigen::Index i = 0; i < d; ++i)
      w(i) = weights[static_cast<std::size_t>(i)] -
             weights[static_cast<std::size_t>(i + d)];
    return w;
  }

  double l1_mass() const {
    double s = 0.0;
    for (double v : weights) s += v;
    return s;
  }
};

struct MirrorConfig {
  double step = 0.1;  // callers typically use sqrt(log(2d)/T)

  static MirrorConfig for_horizon(Eigen::Index d, std::size_t T) {
    MirrorConfig c;
    c.step = std::sqrt(std::log(2.0 * static_cast<double>(d)) /
                       std::max<std::size_t>(T, 1));
    return c;
  }
};

inline MirrorState mirror_descent_step(const MirrorState &state, const Vec &g,
                                       std::size_t t, const MirrorConfig &cfg) {
  (void)t;
  const auto d = state.dim();
  if (g.size() != d)
    throw std::invalid_argument("mirror_descent_step: dimension mismatch");
  MirrorState next = state;
  for (Eigen::Index i = 0; i < d; ++i) {
    next.weights[static_cast<std::size_t>(i)] *= std::exp(-cfg.step * g(i));
    next.weights[static_cast<std::size_t>(i + d)] *= std::exp(cfg.step * g(i));
  }
  double sum = next.l1_mass();
  if (sum > 1.0)
    for (double &v : next.weights) v /= sum;
  return next;
}

// Average-iterate projected SGD over the unit ball. grad_sampler(w, t) must
// return a stochastic subgradient with norm at most 1.
inline Vec projected_sgd(
    const std::function<Vec(const Vec &, std::size_t)> &grad_sampler,
    std::size_t T, double nu = 0.0) {
  if (T < 1) throw std::invalid_argument("projected_sgd: T must be >= 1");
  if (nu <= 0.0) nu = 1.0 / std::sqrt(static_cast<double>(T));
  Vec w;
  Vec avg;
  for (std::size_t t = 1; t <= T; ++t) {
    Vec v = grad_sampler(w, t);
    if (w.size() == 0) w = Vec::Zero(v.size());
    if (avg.size() == 0) avg = Vec::Zero(v.size());
    Vec next = w - nu * v;
    const double n = next.norm();
    if (n > 1.0) next /= n;
    w = next;
    avg += w;
  }
  return avg / static_cast<double>(T);
}

struct EllipsoidDegenerateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Ellipsoid {v : (v-c)^T P^{-1} (v-c) <= 1} with P symmetric positive
// definite.
struct EllipsoidState {
  Vec center;
  Eigen::MatrixXd P;

  static EllipsoidState ball(Eigen::Index d, double radius = 1.0) {
    EllipsoidState s;
    s.center = Vec::Zero(d);
    s.P = radius * radius * Eigen::MatrixXd::Identity(d, d);
    return s;
  }

  bool contains(const Vec &v) const {
    Vec diff = v - center;
    return diff.dot(P.ldlt().solve(diff)) <= 1.0 + 1e-9;
  }

  std::string summary() const {
    std::ostringstream os;
    os << "center_norm=" << center.norm() << " trace=" << P.trace();
    return os.str();
  }
};

// Central cut keeping {v : <g, v - center> <= 0}.
inline EllipsoidState ellipsoid_cut(const EllipsoidState &state, const Vec &g) {
  const auto d = state.center.size();
  if (d < 2)
    throw std::invalid_argument("ellipsoid_cut: need dimension >= 2");
  if (g.norm() == 0.0)
    throw std::invalid_argument("ellipsoid_cut: zero cut direction");
  const double gPg = g.dot(state.P * g);
  if (!(gPg > 0.0) || !std::isfinite(gPg))
    throw EllipsoidDegenerateError(
        "ellipsoid_cut: g^T P g <= 0, state: " + state.summary());
  const double dd = static_cast<double>(d);
  Vec pg = state.P * g / std::sqrt(gPg);
  EllipsoidState next;
  next.center = state.center - pg / (dd + 1.0);
  next.P = (dd * dd / (dd * dd - 1.0)) *
           (state.P - (2.0 / (dd + 1.0)) * pg * pg.transpose());
  next.P = 0.5 * (next.P + next.P.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(next.P);
  if (es.eigenvalues().minCoeff() <= 0.0)
    next.P += (1e-14 * next.P.trace()) * Eigen::MatrixXd::Identity(d, d);
  return next;
}

}  // namespace massart
