#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "massart/core.hpp"
#include "massart/rng.hpp"

namespace massart {

// Deterministic predicate over dataset rows. The structured kinds are
// serializable by the harness; `custom` is an in-process escape hatch.
struct Predicate {
  enum class Kind { all, coord_gt, coord_ge, coord_lt, coord_le, group, custom };
  Kind kind = Kind::all;
  int coord = 0;
  double value = 0.0;
  std::string group_name;
  std::function<bool(const LabeledDataset &, std::size_t)> custom_fn;

  static Predicate all() { return {}; }
  static Predicate on_coord(Kind k, int c, double v) {
    Predicate p;
    p.kind = k;
    p.coord = c;
    p.value = v;
    return p;
  }
  static Predicate group(std::string name) {
    Predicate p;
    p.kind = Kind::group;
    p.group_name = std::move(name);
    return p;
  }
  static Predicate custom(std::function<bool(const LabeledDataset &, std::size_t)> fn) {
    Predicate p;
    p.kind = Kind::custom;
    p.custom_fn = std::move(fn);
    return p;
  }

  bool eval(const LabeledDataset &ds, std::size_t i) const {
    const Vec &x = ds.examples.at(i).x;
    switch (kind) {
      case Kind::all:
        return true;
      case Kind::coord_gt:
        return x(coord) > value;
      case Kind::coord_ge:
        return x(coord) >= value;
      case Kind::coord_lt:
        return x(coord) < value;
      case Kind::coord_le:
        return x(coord) <= value;
      case Kind::group: {
        auto it = ds.groups.find(group_name);
        if (it == ds.groups.end())
          throw std::invalid_argument("predicate: unknown group '" +
                                      group_name + "'");
        return it->second.at(i) != 0;
      }
      case Kind::custom:
        return custom_fn(ds, i);
    }
    return false;
  }
};

struct NoiseRule {
  Predicate pred;
  double rate = 0.0;
};

// Flip-rate map eta(x) expressed as first-match rules plus a default, all
// capped by eta_cap < 1/2.
struct MassartSpec {
  double eta_cap = 0.0;
  std::vector<NoiseRule> rules;
  double default_rate = 0.0;

  void validate() const {
    if (!(eta_cap >= 0.0) || eta_cap >= 0.5)
      throw std::invalid_argument("massart: eta_cap must be in [0, 1/2)");
    if (default_rate < 0.0 || default_rate > eta_cap + 1e-15)
      throw std::invalid_argument("massart: default rate exceeds eta_cap");
    for (const auto &r : rules)
      if (r.rate < 0.0 || r.rate > eta_cap + 1e-15)
        throw std::invalid_argument("massart: rule rate exceeds eta_cap");
  }

  double rate_at(const LabeledDataset &ds, std::size_t i) const {
    for (const auto &r : rules)
      if (r.pred.eval(ds, i)) return r.rate;
    return default_rate;
  }
};

// Flips each label independently with probability eta(x), recording the clean
// label and the flip outcome. One sequential RNG stream per dataset.
inline LabeledDataset apply_massart(const LabeledDataset &clean,
                                    const MassartSpec &spec,
                                    std::uint64_t seed) {
  spec.validate();
  LabeledDataset out = clean;
  Rng rng(seed);
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto &ex = out.examples[i];
    const double rate = spec.rate_at(clean, i);
    ex.clean_y = ex.y;
    const bool flip = uniform01(rng) < rate;
    if (flip) ex.y = -ex.y;
    ex.flipped = flip;
  }
  return out;
}

inline LabeledDataset apply_rcn(const LabeledDataset &clean, double eta,
                                std::uint64_t seed) {
  MassartSpec spec;
  spec.eta_cap = eta;
  spec.default_rate = eta;
  return apply_massart(clean, spec, seed);
}

// Odd, monotone, L-Lipschitz link with range in [-1,1]. Analytic properties
// are checked on a 10^4-point probe grid over [-1,1].
struct LinkFunction {
  enum class Kind { ramp, tanh_scaled, table };
  Kind kind = Kind::ramp;
  double lipschitz_L = 1.0;
  double ramp_gamma = 1.0;
  double ramp_eta = 0.0;
  double tanh_l = 1.0;
  std::vector<double> table_z, table_v;  // odd extension: v(-z) = -v(z)

  static LinkFunction ramp(double gamma, double eta) {
    if (!(gamma > 0.0) || eta < 0.0 || eta >= 0.5)
      throw std::invalid_argument("ramp link: need gamma > 0, eta in [0,1/2)");
    LinkFunction f;
    f.kind = Kind::ramp;
    f.ramp_gamma = gamma;
    f.ramp_eta = eta;
    f.lipschitz_L = (1.0 - 2.0 * eta) / gamma;
    return f;
  }

  static LinkFunction tanh_scaled(double l) {
    if (!(l > 0.0)) throw std::invalid_argument("tanh link: need L > 0");
    LinkFunction f;
    f.kind = Kind::tanh_scaled;
    f.tanh_l = l;
    f.lipschitz_L = l;
    return f;
  }

  static LinkFunction table(std::vector<double> z, std::vector<double> v,
                            double l) {
    if (z.size() != v.size() || z.size() < 2)
      throw std::invalid_argument("table link: need matching sample arrays");
    LinkFunction f;
    f.kind = Kind::table;
    f.table_z = std::move(z);
    f.table_v = std::move(v);
    f.lipschitz_L = l;
    f.validate();
    return f;
  }

  double eval(double z) const {
    switch (kind) {
      case Kind::ramp: {
        const double a = 1.0 - 2.0 * ramp_eta;
        if (z > ramp_gamma) return a;
        if (z < -ramp_gamma) return -a;
        return a * z / ramp_gamma;
      }
      case Kind::tanh_scaled:
        return std::tanh(tanh_l * z);
      case Kind::table: {
        if (z < 0.0) return -eval(-z);
        if (z <= table_z.front()) {
          // linear through the origin up to the first sample
          if (table_z.front() <= 0.0) return table_v.front();
          return table_v.front() * z / table_z.front();
        }
        if (z >= table_z.back()) return table_v.back();
        auto hi = std::upper_bound(table_z.begin(), table_z.end(), z);
        std::size_t j = static_cast<std::size_t>(hi - table_z.begin());
        const double t =
            (z - table_z[j - 1]) / (table_z[j] - table_z[j - 1]);
        return table_v[j - 1] + t * (table_v[j] - table_v[j - 1]);
      }
    }
    return 0.0;
  }

  void validate(std::size_t grid_points = 10000) const {
    double prev = eval(-1.0);
    double prev_z = -1.0;
    for (std::size_t k = 0; k < grid_points; ++k) {
      const double z =
          -1.0 + 2.0 * static_cast<double>(k + 1) / static_cast<double>(grid_points);
      const double v = eval(z);
      if (std::abs(v + eval(-z)) > 1e-12)
        throw std::invalid_argument("link: not odd at z=" + std::to_string(z));
      if (v < prev - 1e-12)
        throw std::invalid_argument("link: not monotone at z=" +
                                    std::to_string(z));
      if (std::abs(v) > 1.0 + 1e-12)
        throw std::invalid_argument("link: range outside [-1,1]");
      if (std::abs(v - prev) > lipschitz_L * (z - prev_z) + 1e-9)
        throw std::invalid_argument("link: Lipschitz bound violated at z=" +
                                    std::to_string(z));
      prev = v;
      prev_z = z;
    }
  }
};

struct MisspecGLMSpec {
  LinkFunction link;
  double zeta = 0.0;
  std::function<double(const Vec &)> delta_fn;  // nullptr means delta == 0

  void validate() const {
    if (zeta < 0.0 || zeta >= 0.5)
      throw std::invalid_argument("glm spec: zeta must be in [0, 1/2)");
    link.validate();
  }
};

// Draws (x, Y) with E[Y|x] = sigma(<w*,x>) + delta(x); the admissibility
// window for delta is checked at every sampled point.
inline LabeledDataset sample_misspec_glm(
    const std::function<Vec(Rng &)> &x_sampler, const Halfspace &w_star,
    const MisspecGLMSpec &spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  if (w_star.w.norm() > 1.0 + 1e-9)
    throw std::invalid_argument("sample_misspec_glm: ||w*|| must be <= 1");
  Rng rng(seed);
  LabeledDataset out;
  out.dimension = w_star.w.size();
  out.examples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec x = x_sampler(rng);
    if (x.norm() > 1.0 + 1e-9)
      throw std::invalid_argument("sample_misspec_glm: sampler left the ball");
    const double z = w_star.score(x);
    const double sig = spec.link.eval(z);
    const double delta = spec.delta_fn ? spec.delta_fn(x) : 0.0;
    const double signed_delta = delta * static_cast<double>(sgn(z));
    if (signed_delta < -2.0 * spec.zeta - 1e-12 ||
        signed_delta > 1.0 - std::abs(sig) + 1e-12)
      throw std::invalid_argument(
          "sample_misspec_glm: delta constraint violated at sample " +
          std::to_string(i) + " (delta=" + std::to_string(delta) +
          ", sigma=" + std::to_string(sig) + ")");
    const double mean = sig + delta;
    if (mean < -1.0 - 1e-12 || mean > 1.0 + 1e-12)
      throw std::invalid_argument(
          "sample_misspec_glm: conditional mean outside [-1,1] at sample " +
          std::to_string(i));
    const double p_plus = std::clamp(0.5 * (1.0 + mean), 0.0, 1.0);
    LabeledExample ex;
    ex.x = std::move(x);
    ex.clean_y = sgn(z);
    ex.y = uniform01(rng) < p_plus ? 1 : -1;
    ex.flipped = (ex.y != *ex.clean_y);
    out.examples.push_back(std::move(ex));
  }
  return out;
}

// Adversary that sees every sample, the true halfspace, and the Bernoulli
// corruption mask before choosing replacement labels on masked rows.
struct NonObliviousSpec {
  enum class Strategy { worst_case_sign_flip, targeted_predicate, custom };
  double eta = 0.0;
  Strategy strategy = Strategy::worst_case_sign_flip;
  Predicate target;  // used by targeted_predicate
  std::function<std::vector<int>(const LabeledDataset &, const Halfspace &,
                                 const std::vector<std::uint8_t> &)>
      custom_fn;

  void validate() const {
    if (eta < 0.0 || eta >= 0.5)
      throw std::invalid_argument("non_oblivious: eta must be in [0, 1/2)");
  }
};

inline LabeledDataset apply_non_oblivious(const LabeledDataset &clean,
                                          const Halfspace &w_star,
                                          const NonObliviousSpec &spec,
                                          std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  std::vector<std::uint8_t> mask(clean.size());
  for (auto &r : mask) r = uniform01(rng) < spec.eta ? 1 : 0;

  std::vector<int> z(clean.size());
  switch (spec.strategy) {
    case NonObliviousSpec::Strategy::worst_case_sign_flip:
      for (std::size_t i = 0; i < clean.size(); ++i)
        z[i] = -clean.examples[i].y;
      break;
    case NonObliviousSpec::Strategy::targeted_predicate:
      for (std::size_t i = 0; i < clean.size(); ++i)
        z[i] = spec.target.eval(clean, i) ? -clean.examples[i].y
                                          : clean.examples[i].y;
      break;
    case NonObliviousSpec::Strategy::custom:
      z = spec.custom_fn(clean, w_star, mask);
      if (z.size() != clean.size())
        throw std::invalid_argument("non_oblivious: strategy length mismatch");
      break;
  }

  LabeledDataset out = clean;
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto &ex = out.examples[i];
    ex.clean_y = ex.y;
    if (mask[i]) {
      if (z[i] != 1 && z[i] != -1)
        throw std::invalid_argument(
            "non_oblivious: strategy returned a label outside {+1,-1}");
      ex.y = z[i];
    }
    ex.flipped = (ex.y != *ex.clean_y);
  }
  return out;
}

}  // namespace massart
