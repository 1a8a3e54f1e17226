#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "massart/learners.hpp"
#include "massart/noise.hpp"
#include "massart/optim.hpp"

namespace massart {

struct CircuitInvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InsufficientSamplesError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Threshold circuit over affine threshold gates. Region membership is the
// unique region output gate that fires.
struct Gate {
  enum class Op { threshold, g_and, g_or, g_not };
  Op op = Op::threshold;
  Vec w;            // threshold gates
  double tau = 0.0;
  int sense = 1;    // +1: <w,x> >= tau fires; -1: <w,x> <= tau fires
  int a = -1, b = -1;  // operand gate indices
};

struct RegionCircuit {
  std::vector<Gate> gates;
  std::map<int, int> region_outputs;  // region id -> gate index

  static RegionCircuit trivial(Eigen::Index d) {
    RegionCircuit c;
    Gate root;
    root.op = Gate::Op::threshold;
    root.w = Vec::Zero(d);
    root.tau = 0.0;
    root.sense = 1;  // 0 >= 0: fires everywhere
    c.gates.push_back(std::move(root));
    c.region_outputs[0] = 0;
    return c;
  }

  int add_gate(Gate g) {
    gates.push_back(std::move(g));
    return static_cast<int>(gates.size()) - 1;
  }

  bool eval_gate(int idx, const Vec &x, std::vector<signed char> &memo) const {
    signed char &m = memo[static_cast<std::size_t>(idx)];
    if (m != 0) return m > 0;
    const Gate &g = gates[static_cast<std::size_t>(idx)];
    bool v = false;
    switch (g.op) {
      case Gate::Op::threshold:
        v = g.sense > 0 ? g.w.dot(x) >= g.tau : g.w.dot(x) <= g.tau;
        break;
      case Gate::Op::g_and:
        v = eval_gate(g.a, x, memo) && eval_gate(g.b, x, memo);
        break;
      case Gate::Op::g_or:
        v = eval_gate(g.a, x, memo) || eval_gate(g.b, x, memo);
        break;
      case Gate::Op::g_not:
        v = !eval_gate(g.a, x, memo);
        break;
    }
    m = v ? 1 : -1;
    return v;
  }

  // Requires the outputs to be mutually exclusive and exhaustive.
  int classify(const Vec &x) const {
    std::vector<signed char> memo(gates.size(), 0);
    int hit = -1;
    for (const auto &[region, gate] : region_outputs) {
      if (eval_gate(gate, x, memo)) {
        if (hit >= 0)
          throw CircuitInvariantError(
              "circuit: regions " + std::to_string(hit) + " and " +
              std::to_string(region) + " both fire");
        hit = region;
      }
    }
    if (hit < 0)
      throw CircuitInvariantError("circuit: no region fires for the point");
    return hit;
  }
};

inline int classify_region(const RegionCircuit &circuit, const Vec &x) {
  return circuit.classify(x);
}

struct PiecewiseRegionClassifier {
  RegionCircuit circuit;
  std::map<int, int> labels;
  std::map<int, bool> live;
  int next_region_id = 1;

  static PiecewiseRegionClassifier trivial(Eigen::Index d, int label) {
    PiecewiseRegionClassifier h;
    h.circuit = RegionCircuit::trivial(d);
    h.labels[0] = label;
    h.live[0] = true;
    return h;
  }

  int predict(const Vec &x) const { return labels.at(circuit.classify(x)); }

  std::vector<int> live_region_ids() const {
    std::vector<int> ids;
    for (const auto &[r, alive] : live)
      if (alive) ids.push_back(r);
    return ids;
  }

  // Splits `region` into the affine half (side=+1: <w,x> >= tau, side=-1:
  // <w,x> <= -tau) and its in-region complement; returns the new region id.
  int split_region(int region, const Vec &w, double tau, int side,
                   int label_half, int label_rest) {
    if (!live.at(region))
      throw CircuitInvariantError("split_region: region is frozen");
    const int parent_gate = circuit.region_outputs.at(region);
    Gate half;
    half.op = Gate::Op::threshold;
    half.w = w;
    half.tau = side > 0 ? tau : -tau;
    half.sense = side > 0 ? 1 : -1;
    const int half_gate = circuit.add_gate(std::move(half));
    Gate not_half;
    not_half.op = Gate::Op::g_not;
    not_half.a = half_gate;
    const int not_gate = circuit.add_gate(std::move(not_half));
    Gate child;
    child.op = Gate::Op::g_and;
    child.a = parent_gate;
    child.b = half_gate;
    const int child_gate = circuit.add_gate(std::move(child));
    Gate rest;
    rest.op = Gate::Op::g_and;
    rest.a = parent_gate;
    rest.b = not_gate;
    const int rest_gate = circuit.add_gate(std::move(rest));

    const int new_id = next_region_id++;
    circuit.region_outputs[new_id] = child_gate;
    circuit.region_outputs[region] = rest_gate;
    labels[new_id] = label_half;
    labels[region] = label_rest;
    live[new_id] = true;
    return new_id;
  }

  void merge_regions(int keep, int absorb) {
    if (!live.at(keep) || !live.at(absorb))
      throw CircuitInvariantError("merge_regions: both regions must be live");
    if (labels.at(keep) != labels.at(absorb))
      throw CircuitInvariantError("merge_regions: labels differ");
    Gate merged;
    merged.op = Gate::Op::g_or;
    merged.a = circuit.region_outputs.at(keep);
    merged.b = circuit.region_outputs.at(absorb);
    circuit.region_outputs[keep] = circuit.add_gate(std::move(merged));
    circuit.region_outputs.erase(absorb);
    labels.erase(absorb);
    live.erase(absorb);
  }

  void freeze(int region, int label) {
    labels.at(region) = label;
    live.at(region) = false;
  }
};

struct GLMConfig {
  double epsilon = 0.05;
  double delta = 0.05;
  double upsilon = -1.0;  // negative means epsilon^{3/2}
  double lipschitz_L = 1.0;
  double zeta = 0.0;
  // tuning record: one place for every constant the listings leave as O(.)
  double sample_const = 8.0;
  double mass_gate_const = 1.0;
  std::size_t max_samples_per_call = 200000;
  std::size_t sgd_iter_cap = 20000;
  double split_call_const = 8.0;
  double freeze_const = 8.0;
  std::size_t rejection_budget_factor = 64;
  std::uint64_t seed = 0;

  double upsilon_or_default() const {
    return upsilon > 0.0 ? upsilon : std::pow(epsilon, 1.5);
  }

  void validate() const {
    if (!(epsilon > 0.0) || epsilon >= 0.5)
      throw std::invalid_argument("glm: epsilon must be in (0, 1/2)");
    if (!(delta > 0.0) || delta >= 1.0)
      throw std::invalid_argument("glm: delta must be in (0,1)");
    if (zeta < 0.0 || zeta >= 0.5)
      throw std::invalid_argument("glm: zeta must be in [0, 1/2)");
    if (!(lipschitz_L > 0.0))
      throw std::invalid_argument("glm: Lipschitz constant must be positive");
  }

  std::size_t capped(double n) const {
    if (!(n > 0.0)) return 1;
    return static_cast<std::size_t>(
        std::min(std::ceil(n), static_cast<double>(max_samples_per_call)));
  }
};

struct SplitOutcome {
  bool progress = false;
  Vec w;
  double tau = 0.0;
  int half_side = 1;  // side of the annulus that was split off
  int half_label = 1; // label assigned to the split-off half
  int region_label = 1;  // label (possibly flipped) for the remainder
  double err_half = 1.0;
  double err_region = 1.0;
  double lambda_used = 0.0;
};

using ConditionalSampler = std::function<LabeledDataset(std::size_t)>;

// One refinement attempt on a region: for each grid leakage value, minimize
// the filtered surrogate by SGD, scan annulus thresholds for the lowest
// conditional misclassification, then try to break off the better half.
inline SplitOutcome glm_split(const ConditionalSampler &draw, int s0,
                              const GLMConfig &cfg, Rng &rng) {
  cfg.validate();
  const double eps = cfg.epsilon;
  const double L = cfg.lipschitz_L;
  const double zeta_p = 2.0 * cfg.zeta + eps;
  const double delta_p = std::max(cfg.delta * eps, 1e-12);
  const double c = cfg.sample_const;

  // base-label error on the region
  const std::size_t n1 = cfg.capped(c * std::log(1.0 / delta_p) / (eps * eps));
  LabeledDataset ds1 = draw(n1);
  double err_s0 = 0.0;
  for (const auto &e : ds1.examples) err_s0 += e.y != s0 ? 1.0 : 0.0;
  err_s0 /= static_cast<double>(ds1.size());
  const int s = err_s0 > 0.5 ? -s0 : s0;
  const double err_s = std::min(err_s0, 1.0 - err_s0);

  // shared empirical distribution for SGD and threshold search
  const std::size_t n2 =
      cfg.capped(c * L * L / (eps * eps * eps * zeta_p * zeta_p));
  LabeledDataset dhat = draw(n2);

  struct Candidate {
    double lambda, tau, err;
    Vec w;
  };
  std::optional<Candidate> best;

  const std::size_t sgd_iters = std::min<std::size_t>(
      cfg.sgd_iter_cap,
      static_cast<std::size_t>(std::ceil(c * L * L /
                                         (eps * eps * zeta_p * zeta_p) *
                                         std::log(1.0 / delta_p))));

  std::vector<double> grid;
  for (std::size_t k = 0;; ++k) {
    const double lam = static_cast<double>(k) * eps / 4.0;
    if (lam > 0.5 + 1e-12) break;
    grid.push_back(std::min(lam, 0.5));
  }
  if (grid.back() < 0.5) grid.push_back(0.5);

  for (double lam : grid) {
    LossConfig loss_cfg(lam);
    auto grad = [&](const Vec &w, std::size_t) -> Vec {
      const auto &ex = dhat.examples[static_cast<std::size_t>(
          uniform01(rng) * static_cast<double>(dhat.size()))];
      Vec w0 = w.size() == 0 ? Vec(Vec::Zero(dhat.dimension)) : w;
      const double z = -static_cast<double>(ex.y) * w0.dot(ex.x);
      return Vec(leaky_relu_deriv(loss_cfg, z) *
                 -static_cast<double>(ex.y) * ex.x);
    };
    Vec w_lam = projected_sgd(grad, sgd_iters);
    if (w_lam.norm() < 1e-12) {
      w_lam = Vec::Zero(dhat.dimension);
      w_lam(0) = 1.0;
    } else {
      w_lam.normalize();
    }

    // annulus mass requirement; the lambda=0 row only admits the trivial
    // threshold tau=0 because its mass requirement is vacuous only there
    const double mass_req =
        lam > 0.0 ? std::min(1.0, eps * zeta_p / (9.0 * L * lam)) : 1.0;
    // at the listing's sample sizes the floor-mass annulus holds well over
    // 16/eps^2 points; with capped draws, enforce that count directly so the
    // per-threshold error estimates stay accurate to O(eps)
    const std::size_t count_floor = std::min<std::size_t>(
        dhat.size(),
        static_cast<std::size_t>(std::ceil(16.0 / (eps * eps))));

    std::vector<std::pair<double, bool>> proj;  // (|<w,x>|, wrong?)
    proj.reserve(dhat.size());
    for (const auto &e : dhat.examples) {
      const double sc = w_lam.dot(e.x);
      proj.emplace_back(std::abs(sc), sgn(sc) != e.y);
    }
    std::sort(proj.begin(), proj.end(),
              [](const auto &a, const auto &b) { return a.first < b.first; });

    // suffix scan over distinct |projection| values, plus tau = 0
    std::vector<std::pair<double, double>> rows;  // (tau, err) qualifying
    {
      double wrong = 0.0;
      std::size_t count = 0;
      for (std::size_t k = proj.size(); k-- > 0;) {
        wrong += proj[k].second ? 1.0 : 0.0;
        ++count;
        const bool first_of_value =
            k == 0 || proj[k - 1].first < proj[k].first;
        if (!first_of_value) continue;
        const double tau = k == 0 ? 0.0 : proj[k].first;
        const double mass =
            static_cast<double>(count) / static_cast<double>(proj.size());
        if (mass + 1e-12 < mass_req || count < count_floor) continue;
        rows.emplace_back(tau, wrong / static_cast<double>(count));
      }
    }
    if (rows.empty()) continue;
    double min_err = std::numeric_limits<double>::infinity();
    for (const auto &[tau, err] : rows) min_err = std::min(min_err, err);
    // errors within eps/2 of the minimum are statistical ties; among those
    // take the smallest tau, i.e. the widest annulus
    double best_err = std::numeric_limits<double>::infinity();
    double best_tau = std::numeric_limits<double>::infinity();
    for (const auto &[tau, err] : rows)
      if (err <= min_err + eps / 2.0 && tau < best_tau) {
        best_tau = tau;
        best_err = err;
      }
    if (!best || best_err < best->err - 1e-15) {
      best = Candidate{lam, best_tau, best_err, w_lam};
    }
  }
  if (!best)
    throw InsufficientSamplesError("glm_split: no admissible threshold found");

  // estimate the two affine halves of the chosen annulus
  const double lam_eff = std::max(best->lambda, eps / 4.0);
  const std::size_t n3 = cfg.capped(c * L * lam_eff /
                                    (eps * eps * eps * eps * zeta_p) *
                                    std::log(1.0 / delta_p));
  LabeledDataset ds3 = draw(n3);
  double cnt_plus = 0, cnt_minus = 0, wrong_plus = 0, wrong_minus = 0;
  for (const auto &e : ds3.examples) {
    const double sc = best->w.dot(e.x);
    if (sc >= best->tau) {
      cnt_plus += 1;
      wrong_plus += e.y != 1 ? 1 : 0;
    } else if (sc <= -best->tau) {
      cnt_minus += 1;
      wrong_minus += e.y != -1 ? 1 : 0;
    }
  }
  const double n3d = static_cast<double>(ds3.size());
  const double mu_plus = cnt_plus / n3d, mu_minus = cnt_minus / n3d;
  const double err_plus =
      cnt_plus > 0 ? wrong_plus / cnt_plus : std::numeric_limits<double>::infinity();
  const double err_minus =
      cnt_minus > 0 ? wrong_minus / cnt_minus
                    : std::numeric_limits<double>::infinity();
  const double mass_gate =
      cfg.mass_gate_const * eps * eps * zeta_p / (L * lam_eff);

  int half;
  if (std::min(mu_plus, mu_minus) >= mass_gate)
    half = err_plus <= err_minus ? 1 : -1;
  else
    half = mu_plus >= mu_minus ? 1 : -1;

  SplitOutcome out;
  out.w = best->w;
  out.tau = best->tau;
  out.half_side = half;
  out.half_label = half;
  out.region_label = s;
  out.err_half = half > 0 ? err_plus : err_minus;
  out.err_region = err_s;
  out.lambda_used = best->lambda;
  out.progress = std::isfinite(out.err_half) && out.err_half <= err_s - eps;
  return out;
}

// Evaluation-only statistics computed from generator metadata.
struct RegionStats {
  double delta = 0.0;       // E[sigma(|<w*,x>|)] - 2 zeta over the region
  double lambda_opt = 0.5;  // (1 - delta)/2
  double mass = std::numeric_limits<double>::quiet_NaN();
  double err_est = std::numeric_limits<double>::quiet_NaN();
  double delta_se = 0.0;
};

inline RegionStats region_lambda(const LabeledDataset &region_data,
                                 const LinkFunction &link,
                                 const Halfspace &w_star, double zeta,
                                 std::optional<int> label = std::nullopt,
                                 double mass = std::numeric_limits<double>::quiet_NaN()) {
  if (region_data.empty())
    throw std::invalid_argument("region_lambda: empty region data");
  double mean = 0.0, sq = 0.0;
  for (const auto &e : region_data.examples) {
    const double v = link.eval(std::abs(w_star.score(e.x)));
    mean += v;
    sq += v * v;
  }
  const double n = static_cast<double>(region_data.size());
  mean /= n;
  RegionStats st;
  st.delta = mean - 2.0 * zeta;
  st.lambda_opt = (1.0 - st.delta) / 2.0;
  st.delta_se = std::sqrt(std::max(0.0, sq / n - mean * mean) / n);
  st.mass = mass;
  if (label) {
    double wrong = 0.0;
    for (const auto &e : region_data.examples)
      wrong += e.y != *label ? 1.0 : 0.0;
    st.err_est = wrong / n;
  }
  return st;
}

namespace detail {

struct GlmLoopState {
  std::size_t split_calls = 0;
  std::size_t freezes = 0;
};

}  // namespace detail

// Merge pass: estimate each live region's error from one global draw and
// join the first live pair that shares a label and has comparable error.
// Returns the coarser classifier, or nullopt when no pair qualifies.
inline std::optional<PiecewiseRegionClassifier> glm_merge(
    const PiecewiseRegionClassifier &h, double upsilon, double delta,
    const std::function<LabeledDataset(std::size_t, Rng &)> &sampler,
    Rng &rng, const GLMConfig &cfg) {
  auto live_ids = h.live_region_ids();
  if (live_ids.size() < 2)
    throw std::invalid_argument("glm_merge: need at least 2 live regions");
  const std::size_t n = cfg.capped(
      cfg.sample_const *
      std::log(static_cast<double>(live_ids.size()) / std::max(delta, 1e-12)) /
      (upsilon * upsilon));
  LabeledDataset probe = sampler(n, rng);
  std::map<int, std::pair<double, double>> tallies;  // region -> (n, wrong)
  for (const auto &e : probe.examples) {
    const int r = h.circuit.classify(e.x);
    auto it = h.live.find(r);
    if (it == h.live.end() || !it->second) continue;
    auto &t = tallies[r];
    t.first += 1.0;
    t.second += e.y != h.labels.at(r) ? 1.0 : 0.0;
  }
  for (std::size_t i = 0; i < live_ids.size(); ++i) {
    for (std::size_t j = i + 1; j < live_ids.size(); ++j) {
      const int a = live_ids[i], b = live_ids[j];
      if (h.labels.at(a) != h.labels.at(b)) continue;
      auto ia = tallies.find(a), ib = tallies.find(b);
      if (ia == tallies.end() || ib == tallies.end()) continue;
      const double err_a = ia->second.second / ia->second.first;
      const double err_b = ib->second.second / ib->second.first;
      if (std::abs(err_a - err_b) <= upsilon) {
        PiecewiseRegionClassifier merged = h;
        merged.merge_regions(a, b);
        return merged;
      }
    }
  }
  return std::nullopt;
}

// Partition-refinement learner: repeatedly split the largest live region,
// merge comparable same-label live regions, and freeze regions whose constant
// label is certified competitive.
inline PiecewiseRegionClassifier learn_misspec_glm(
    const std::function<LabeledDataset(std::size_t, Rng &)> &sampler,
    const GLMConfig &cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const double eps = cfg.epsilon;
  const double ups = cfg.upsilon_or_default();
  const double L = cfg.lipschitz_L;
  const double delta_p =
      std::max(cfg.delta * std::pow(eps, 6.0) / L, 1e-12);
  const double c = cfg.sample_const;

  const std::size_t max_splits = static_cast<std::size_t>(
      std::ceil(cfg.split_call_const * L / std::pow(eps, 6.0)));
  const std::size_t max_freezes = static_cast<std::size_t>(
      std::ceil(cfg.freeze_const * std::log(1.0 / eps) / ups));
  const std::size_t live_bound =
      static_cast<std::size_t>(std::ceil(2.0 / ups)) + 1;

  // initial constant label
  const std::size_t n0 = cfg.capped(c * std::log(1.0 / delta_p) / (eps * eps));
  LabeledDataset first = sampler(n0, rng);
  double plus = 0.0;
  for (const auto &e : first.examples) plus += e.y == 1 ? 1.0 : 0.0;
  const int s_init = plus >= static_cast<double>(first.size()) / 2.0 ? 1 : -1;
  auto h = PiecewiseRegionClassifier::trivial(first.dimension, s_init);

  detail::GlmLoopState state;
  while (true) {
    // live-mass stopping rule
    const std::size_t n_live =
        cfg.capped(c * std::log(1.0 / delta_p) / (eps * eps));
    LabeledDataset probe = sampler(n_live, rng);
    double live_mass = 0.0;
    for (const auto &e : probe.examples)
      if (h.live.at(h.circuit.classify(e.x))) live_mass += 1.0;
    live_mass /= static_cast<double>(probe.size());
    if (live_mass <= eps) return h;

    // largest live region by conditional empirical mass
    const std::size_t n_mass =
        cfg.capped(c * std::log(1.0 / (delta_p * ups)) / (eps * ups * ups));
    LabeledDataset mass_probe = sampler(n_mass, rng);
    std::map<int, std::size_t> counts;
    for (const auto &e : mass_probe.examples) {
      const int r = h.circuit.classify(e.x);
      if (h.live.at(r)) counts[r] += 1;
    }
    if (counts.empty())
      throw InsufficientSamplesError(
          "glm: no samples landed in any live region");
    int target = counts.begin()->first;
    std::size_t target_count = 0;
    for (const auto &[r, cnt] : counts)
      if (cnt > target_count) {
        target = r;
        target_count = cnt;
      }

    // conditional sampler by rejection, one doubled retry before aborting
    auto conditional = [&](std::size_t want) {
      for (int attempt = 0; attempt < 2; ++attempt) {
        const std::size_t budget = (want * cfg.rejection_budget_factor)
                                   << attempt;
        std::vector<LabeledExample> kept;
        kept.reserve(want);
        std::size_t drawn = 0;
        while (kept.size() < want && drawn < budget) {
          const std::size_t chunk = std::min<std::size_t>(
              std::max<std::size_t>(want, 256), budget - drawn);
          LabeledDataset batch = sampler(chunk, rng);
          drawn += batch.size();
          for (auto &e : batch.examples) {
            if (h.circuit.classify(e.x) == target) {
              kept.push_back(std::move(e));
              if (kept.size() == want) break;
            }
          }
        }
        if (kept.size() >= want) return dataset_from(std::move(kept), first.dimension);
      }
      throw InsufficientSamplesError(
          "glm: rejection sampling exhausted its budget for region " +
          std::to_string(target) +
          " (empirical conditional mass too small)");
    };

    if (++state.split_calls > max_splits)
      throw std::runtime_error(
          "glm: split budget exceeded; the generative contract is violated");
    SplitOutcome sp = glm_split(conditional, h.labels.at(target), cfg, rng);

    if (sp.progress) {
      h.split_region(target, sp.w, sp.tau, sp.half_side, sp.half_label,
                     sp.region_label);
      // one merge attempt keeps the number of live regions bounded
      if (h.live_region_ids().size() >= 2) {
        auto merged = glm_merge(h, ups, delta_p, sampler, rng, cfg);
        if (merged) h = std::move(*merged);
      }
    } else {
      h.freeze(target, sp.region_label);
      if (++state.freezes > max_freezes)
        throw std::runtime_error(
            "glm: freeze budget exceeded; the generative contract is "
            "violated");
    }

    if (h.live_region_ids().size() > live_bound)
      throw std::runtime_error("glm: live-region bound exceeded");
  }
}

// Proper variant for the exactly-specified case: learn the region classifier,
// then distill it into a halfspace with the noise bound implied by the link
// margin.
inline Halfspace proper_glm_zero_misspec(
    const std::function<LabeledDataset(std::size_t, Rng &)> &sampler,
    const GLMConfig &cfg, double gamma_link,
    const LearnerConfig *distill_overrides = nullptr) {
  if (cfg.zeta != 0.0)
    throw std::invalid_argument(
        "proper_glm_zero_misspec: requires zeta == 0");
  if (!(gamma_link > 0.0) || gamma_link > 1.0)
    throw std::invalid_argument(
        "proper_glm_zero_misspec: link margin must be in (0,1]");
  auto teacher_model = learn_misspec_glm(sampler, cfg);
  Classifier teacher = [teacher_model](const Vec &x) {
    return teacher_model.predict(x);
  };

  LearnerConfig dcfg;
  if (distill_overrides) dcfg = *distill_overrides;
  dcfg.eta = (1.0 - gamma_link) / 2.0;
  if (dcfg.epsilon <= 0.0) dcfg.epsilon = cfg.epsilon;
  if (dcfg.gamma <= 0.0) dcfg.gamma = gamma_link / cfg.lipschitz_L;
  dcfg.seed = derive_seed(cfg.seed, 0x9d15, 0x71);

  Rng rng(derive_seed(cfg.seed, 0x9d15, 0x72));
  const std::size_t m = std::min<std::size_t>(
      cfg.max_samples_per_call,
      static_cast<std::size_t>(std::ceil(
          8.0 * std::log(4.0 / dcfg.delta) / (dcfg.epsilon * dcfg.epsilon))));
  LabeledDataset test = sampler(m, rng);
  GeneratorSource source(sampler, derive_seed(cfg.seed, 0x9d15, 0x73));
  auto report = distill(teacher, source, test, dcfg, DistillMode::gd);
  return report.final;
}

}  // namespace massart
