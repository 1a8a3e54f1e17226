#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "massart/core.hpp"
#include "massart/rng.hpp"

namespace massart {

// Explicit finite-support distribution with a total +-1 concept.
struct FiniteDistribution {
  std::vector<Vec> points;
  std::vector<double> probs;
  std::vector<int> concept_labels;

  void validate() const {
    if (points.size() != probs.size() || points.size() != concept_labels.size())
      throw std::invalid_argument("finite distribution: length mismatch");
    if (points.empty())
      throw std::invalid_argument("finite distribution: empty support");
    double sum = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0))
        throw std::invalid_argument("finite distribution: negative prob");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw std::invalid_argument(
          "finite distribution: probabilities sum to " + std::to_string(sum));
    for (int c : concept_labels)
      if (c != 1 && c != -1)
        throw std::invalid_argument("finite distribution: concept not +-1");
  }
};

struct TiltResult {
  FiniteDistribution tilted;
  double Z = 1.0;
};

// Reweights the support by (1 - 2 eta(x))/Z, converting noisy correlational
// statistics into noiseless ones over the tilted distribution:
// E_noisy[y G(x)] = Z * E_tilted[f(x) G(x)] identically.
inline TiltResult tilt_distribution(const FiniteDistribution &dist,
                                    const std::vector<double> &eta) {
  dist.validate();
  if (eta.size() != dist.points.size())
    throw std::invalid_argument("tilt: eta length mismatch");
  double z = 0.0;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    if (!(eta[i] >= 0.0) || eta[i] >= 0.5)
      throw std::invalid_argument("tilt: eta must lie in [0, 1/2) pointwise");
    z += (1.0 - 2.0 * eta[i]) * dist.probs[i];
  }
  TiltResult out;
  out.Z = z;
  out.tilted = dist;
  for (std::size_t i = 0; i < eta.size(); ++i)
    out.tilted.probs[i] = (1.0 - 2.0 * eta[i]) * dist.probs[i] / z;
  return out;
}

// Correlational statistic E[y * G(x)] under the noisy view of `dist`.
inline double csq_true_expectation(const FiniteDistribution &dist,
                                   const std::vector<double> &eta,
                                   const std::function<double(const Vec &)> &G) {
  double acc = 0.0;
  for (std::size_t i = 0; i < dist.points.size(); ++i)
    acc += dist.probs[i] * (1.0 - 2.0 * eta[i]) *
           static_cast<double>(dist.concept_labels[i]) * G(dist.points[i]);
  return acc;
}

// Honest-but-adversarial oracle: answers within +-tolerance of the truth,
// either exactly or with a seeded deterministic perturbation.
struct CsqOracle {
  enum class Policy { exact, seeded_adversarial };

  FiniteDistribution dist;
  std::vector<double> eta;  // empty means noise-free
  double tolerance = 0.0;
  Policy policy = Policy::exact;
  std::uint64_t seed = 0;
  mutable std::size_t query_index = 0;

  double answer(const std::function<double(const Vec &)> &G) const {
    for (const auto &x : dist.points) {
      const double v = G(x);
      if (!(v >= -1.0 - 1e-12) || !(v <= 1.0 + 1e-12))
        throw std::invalid_argument("csq: query value outside [-1,1]");
    }
    const std::vector<double> zero(dist.points.size(), 0.0);
    const double truth =
        csq_true_expectation(dist, eta.empty() ? zero : eta, G);
    ++query_index;
    if (policy == Policy::exact) return truth;
    Rng rng(derive_seed(seed, query_index));
    const double shift = tolerance * (2.0 * uniform01(rng) - 1.0);
    const double z = truth + shift;
    if (std::abs(z - truth) > tolerance + 1e-15)
      throw std::logic_error("csq: perturbation exceeded the tolerance");
    return z;
  }
};

// Learner contract: declare a query budget and tolerance, then run against
// an ask(G) callback and return a hypothesis.
struct CsqLearner {
  std::size_t num_queries = 0;
  double tolerance = 0.0;
  std::function<Classifier(
      const std::function<double(const std::function<double(const Vec &)> &)> &)>
      run;
};

struct CsqToMassartResult {
  bool success = false;
  Classifier hypothesis;
  double error = 1.0;   // noisy error of the accepted hypothesis
  double opt = 0.0;     // E[eta(x)], the best achievable noisy error
  double chosen_Z = 0.0;
};

// Grid search over the unknown normalizer: simulate the noise-free learner
// with answers E_noisy[y G]/Z_tilde, keep the first hypothesis whose measured
// error clears OPT + 3 eps / 2.
inline CsqToMassartResult massart_learn_from_csqs(
    const FiniteDistribution &dist, const std::vector<double> &eta,
    double eta_bound, const CsqLearner &learner, double epsilon,
    double delta) {
  (void)delta;  // the analytic oracle makes every estimate exact
  dist.validate();
  if (eta.size() != dist.points.size())
    throw std::invalid_argument("csq reduction: eta length mismatch");
  if (!(eta_bound >= 0.0) || eta_bound >= 0.5)
    throw std::invalid_argument("csq reduction: eta bound in [0, 1/2)");
  for (double e : eta)
    if (e > eta_bound + 1e-15)
      throw std::invalid_argument("csq reduction: eta exceeds its bound");

  CsqToMassartResult out;
  for (std::size_t i = 0; i < dist.points.size(); ++i)
    out.opt += dist.probs[i] * eta[i];

  auto noisy_error = [&](const Classifier &h) {
    double err = 0.0;
    for (std::size_t i = 0; i < dist.points.size(); ++i) {
      const bool match = h(dist.points[i]) == dist.concept_labels[i];
      err += dist.probs[i] * (match ? eta[i] : 1.0 - eta[i]);
    }
    return err;
  };

  const double tau_prime =
      learner.tolerance * (1.0 - 2.0 * eta_bound) * (1.0 - 2.0 * eta_bound) /
      2.0;
  if (!(tau_prime > 0.0))
    throw std::invalid_argument("csq reduction: degenerate tolerance grid");

  for (double z_tilde = 0.0; z_tilde <= 1.0 + 1e-12; z_tilde += tau_prime) {
    auto ask = [&](const std::function<double(const Vec &)> &G) {
      const double raw = csq_true_expectation(dist, eta, G);
      if (z_tilde == 0.0)
        // degenerate grid point: answers are clamped garbage by definition
        return raw == 0.0 ? 0.0 : std::copysign(1e6, raw);
      return std::clamp(raw / z_tilde, -1e6, 1e6);
    };
    Classifier h = learner.run(ask);
    const double err = noisy_error(h);
    if (err <= out.opt + 1.5 * epsilon) {
      out.success = true;
      out.hypothesis = std::move(h);
      out.error = err;
      out.chosen_Z = z_tilde;
      return out;
    }
  }
  return out;  // FAIL: no grid value produced an acceptable hypothesis
}

}  // namespace massart
