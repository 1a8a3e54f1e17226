#include <catch2/catch_amalgamated.hpp>

#include "massart/csq.hpp"

using namespace massart;

namespace {

Vec v1(double a) {
  Vec v(1);
  v << a;
  return v;
}

FiniteDistribution two_point() {
  FiniteDistribution d;
  d.points = {v1(0.0), v1(1.0)};
  d.probs = {0.5, 0.5};
  d.concept_labels = {1, -1};
  return d;
}

// Uniform distribution over {0,1}^dims with a k-variable conjunction concept.
FiniteDistribution hypercube_conjunction(int dims, int k) {
  FiniteDistribution d;
  const int n = 1 << dims;
  for (int m = 0; m < n; ++m) {
    Vec x(dims);
    bool on = true;
    for (int j = 0; j < dims; ++j) {
      x(j) = (m >> j) & 1 ? 1.0 : 0.0;
      if (j < k && x(j) < 0.5) on = false;
    }
    d.points.push_back(x);
    d.probs.push_back(1.0 / n);
    d.concept_labels.push_back(on ? 1 : -1);
  }
  return d;
}

// Enumerates all conjunctions over subsets of size <= 2, asks for each
// correlation, and returns the best-correlated hypothesis.
CsqLearner conjunction_scan_learner(int dims) {
  CsqLearner learner;
  std::vector<std::vector<int>> subsets;
  subsets.push_back({});
  for (int i = 0; i < dims; ++i) subsets.push_back({i});
  for (int i = 0; i < dims; ++i)
    for (int j = i + 1; j < dims; ++j) subsets.push_back({i, j});
  learner.num_queries = subsets.size();
  learner.tolerance = 0.1;
  learner.run = [subsets](const std::function<double(
                              const std::function<double(const Vec &)> &)> &ask) {
    auto hyp = [](std::vector<int> s) {
      return [s](const Vec &x) {
        for (int i : s)
          if (x(i) < 0.5) return -1;
        return 1;
      };
    };
    double best_corr = -2.0;
    std::vector<int> best_set;
    for (const auto &s : subsets) {
      auto h = hyp(s);
      const double corr =
          ask([h](const Vec &x) { return static_cast<double>(h(x)); });
      if (corr > best_corr) {
        best_corr = corr;
        best_set = s;
      }
    }
    auto h = hyp(best_set);
    return Classifier(h);
  };
  return learner;
}

}  // namespace

TEST_CASE("tilting reweights by one minus twice the flip rate") {
  auto d = two_point();
  auto out = tilt_distribution(d, {0.0, 0.25});
  REQUIRE(out.Z == Catch::Approx(0.75));
  REQUIRE(out.tilted.probs[0] == Catch::Approx(2.0 / 3.0));
  REQUIRE(out.tilted.probs[1] == Catch::Approx(1.0 / 3.0));
}

TEST_CASE("zero noise tilts to the identity") {
  auto d = two_point();
  auto out = tilt_distribution(d, {0.0, 0.0});
  REQUIRE(out.Z == 1.0);
  REQUIRE(out.tilted.probs == d.probs);
}

TEST_CASE("tilt rejects rates at or above one half") {
  auto d = two_point();
  REQUIRE_THROWS_AS(tilt_distribution(d, {0.0, 0.5}), std::invalid_argument);
}

TEST_CASE("tilt identity holds exactly on random instances") {
  Rng rng(71);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 10;
    FiniteDistribution d;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      d.points.push_back(v1(uniform01(rng)));
      const double p = uniform01(rng) + 0.01;
      d.probs.push_back(p);
      sum += p;
      d.concept_labels.push_back(uniform01(rng) < 0.5 ? 1 : -1);
    }
    for (auto &p : d.probs) p /= sum;
    // renormalize exactly
    double check = 0.0;
    for (std::size_t i = 0; i + 1 < d.probs.size(); ++i) check += d.probs[i];
    d.probs.back() = 1.0 - check;
    std::vector<double> eta(n);
    for (auto &e : eta) e = 0.49 * uniform01(rng);
    std::vector<double> g(n);
    for (auto &v : g) v = 2.0 * uniform01(rng) - 1.0;

    auto out = tilt_distribution(d, eta);
    // left side: E_noisy[y G(x)]; right side: Z * E_tilted[f(x) G(x)]
    double lhs = 0.0, rhs = 0.0;
    for (int i = 0; i < n; ++i) {
      lhs += d.probs[static_cast<std::size_t>(i)] * (1.0 - 2.0 * eta[static_cast<std::size_t>(i)]) *
             d.concept_labels[static_cast<std::size_t>(i)] * g[static_cast<std::size_t>(i)];
      rhs += out.tilted.probs[static_cast<std::size_t>(i)] *
             d.concept_labels[static_cast<std::size_t>(i)] * g[static_cast<std::size_t>(i)];
    }
    rhs *= out.Z;
    REQUIRE(lhs == Catch::Approx(rhs).margin(1e-12));
  }
}

TEST_CASE("oracle answers the concept correlation within tolerance") {
  auto d = two_point();
  CsqOracle oracle;
  oracle.dist = d;
  oracle.eta = {0.1, 0.3};
  oracle.tolerance = 0.05;
  oracle.policy = CsqOracle::Policy::seeded_adversarial;
  oracle.seed = 9;
  auto f = [&](const Vec &x) {
    return static_cast<double>(x(0) < 0.5 ? 1 : -1);
  };
  const double expected = 0.5 * 0.8 * 1.0 * 1.0 + 0.5 * 0.4 * (-1.0) * (-1.0);
  const double z = oracle.answer(f);
  REQUIRE(std::abs(z - expected) <= oracle.tolerance + 1e-15);
}

TEST_CASE("zero query has answers within the tolerance band of zero") {
  auto d = two_point();
  CsqOracle oracle;
  oracle.dist = d;
  oracle.eta = {0.2, 0.2};
  oracle.tolerance = 0.03;
  oracle.policy = CsqOracle::Policy::seeded_adversarial;
  for (int q = 0; q < 10; ++q) {
    const double z = oracle.answer([](const Vec &) { return 0.0; });
    REQUIRE(std::abs(z) <= 0.03 + 1e-15);
  }
}

TEST_CASE("exact policy answers equal the brute-force sums") {
  Rng rng(73);
  auto d = hypercube_conjunction(4, 2);
  std::vector<double> eta(d.points.size());
  for (auto &e : eta) e = 0.4 * uniform01(rng);
  CsqOracle oracle;
  oracle.dist = d;
  oracle.eta = eta;
  auto g = [](const Vec &x) { return x(0) > 0.5 ? 0.7 : -0.2; };
  double brute = 0.0;
  for (std::size_t i = 0; i < d.points.size(); ++i)
    brute += d.probs[i] * (1.0 - 2.0 * eta[i]) * d.concept_labels[i] *
             g(d.points[i]);
  REQUIRE(oracle.answer(g) == Catch::Approx(brute).margin(1e-15));
}

TEST_CASE("oracle rejects out-of-range queries") {
  auto d = two_point();
  CsqOracle oracle;
  oracle.dist = d;
  REQUIRE_THROWS_AS(oracle.answer([](const Vec &) { return 2.0; }),
                    std::invalid_argument);
}

TEST_CASE("reduction grid has the documented resolution") {
  // tolerance 0.1, noise bound 0.25 -> step 0.0125 -> 81 grid values
  const double tau_prime = 0.1 * 0.5 * 0.5 / 2.0;
  REQUIRE(tau_prime == Catch::Approx(0.0125));
  int count = 0;
  for (double z = 0.0; z <= 1.0 + 1e-12; z += tau_prime) ++count;
  REQUIRE(count == 81);
}

TEST_CASE("noise-free reduction reproduces the learner's output at Z=1") {
  auto d = hypercube_conjunction(6, 2);
  std::vector<double> eta(d.points.size(), 0.0);
  auto learner = conjunction_scan_learner(6);
  auto out = massart_learn_from_csqs(d, eta, 0.25, learner, 0.1, 0.05);
  REQUIRE(out.success);
  REQUIRE(out.opt == 0.0);
  REQUIRE(out.error <= 0.2);
  // the hypothesis must match the planted conjunction exactly
  for (std::size_t i = 0; i < d.points.size(); ++i)
    REQUIRE(out.hypothesis(d.points[i]) == d.concept_labels[i]);
}

TEST_CASE("reduction learns the conjunction under pointwise-varying noise") {
  Rng rng(79);
  auto d = hypercube_conjunction(6, 2);
  std::vector<double> eta(d.points.size());
  for (auto &e : eta) e = 0.25 * uniform01(rng);
  auto learner = conjunction_scan_learner(6);
  const double epsilon = 0.1;
  auto out = massart_learn_from_csqs(d, eta, 0.25, learner, epsilon, 0.05);
  REQUIRE(out.success);
  // exact enumeration of OPT and of the accepted hypothesis's error
  REQUIRE(out.error <= out.opt + 2.0 * epsilon);
}

TEST_CASE("worst-case tilt construction pins the optimal error") {
  // when 1 - 2 eta(x) = D'(x) / ((1 + eta) D(x)) pointwise, the best
  // achievable noisy error is eta / (2 (1 + eta)) exactly
  Rng rng(83);
  const double eta_bound = 0.2;
  const int n = 16;
  FiniteDistribution base;
  for (int i = 0; i < n; ++i) {
    base.points.push_back(v1(static_cast<double>(i)));
    base.probs.push_back(1.0 / n);
    base.concept_labels.push_back(uniform01(rng) < 0.5 ? 1 : -1);
  }
  // D' = D * (1 +- 0.9 eta) with balanced signs, so D' sums to 1 exactly
  std::vector<int> signs(n);
  for (int i = 0; i < n; ++i) signs[static_cast<std::size_t>(i)] = i % 2 ? 1 : -1;
  std::shuffle(signs.begin(), signs.end(), rng);
  double opt = 0.0;
  for (int i = 0; i < n; ++i) {
    const double dprime =
        base.probs[static_cast<std::size_t>(i)] *
        (1.0 + 0.9 * eta_bound * signs[static_cast<std::size_t>(i)]);
    const double ratio =
        dprime / ((1.0 + eta_bound) * base.probs[static_cast<std::size_t>(i)]);
    const double eta_x = 0.5 * (1.0 - ratio);
    REQUIRE(eta_x >= 0.0);
    REQUIRE(eta_x <= eta_bound);
    opt += base.probs[static_cast<std::size_t>(i)] * eta_x;
  }
  // OPT = E[eta(x)] summed exactly
  REQUIRE(opt == Catch::Approx(eta_bound / (2.0 * (1.0 + eta_bound)))
                     .margin(1e-12));
}
