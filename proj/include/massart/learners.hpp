#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "massart/filters.hpp"
#include "massart/optim.hpp"

namespace massart {

struct SourceExhaustedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Per-iteration training-data supplier. The partition source hands out
// disjoint chunks of a fixed dataset (fresh samples per oracle call, as the
// analysis assumes); the generator source draws new i.i.d. batches; the reuse
// source returns the full dataset every call, which is how the numerical
// experiments are run on fixed files.
class BatchSource {
 public:
  virtual ~BatchSource() = default;
  virtual LabeledDataset next_batch(std::size_t n) = 0;
};

class GeneratorSource final : public BatchSource {
 public:
  GeneratorSource(std::function<LabeledDataset(std::size_t, Rng &)> gen,
                  std::uint64_t seed)
      : gen_(std::move(gen)), rng_(seed) {}

  LabeledDataset next_batch(std::size_t n) override { return gen_(n, rng_); }

 private:
  std::function<LabeledDataset(std::size_t, Rng &)> gen_;
  Rng rng_;
};

class PartitionSource final : public BatchSource {
 public:
  explicit PartitionSource(LabeledDataset data) : data_(std::move(data)) {}

  LabeledDataset next_batch(std::size_t n) override {
    if (cursor_ + n > data_.size())
      throw SourceExhaustedError(
          "partition source exhausted after " + std::to_string(cursor_) +
          " of " + std::to_string(data_.size()) + " examples");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), cursor_);
    cursor_ += n;
    return dataset_subset(data_, idx);
  }

  std::size_t remaining() const { return data_.size() - cursor_; }

 private:
  LabeledDataset data_;
  std::size_t cursor_ = 0;
};

class ReuseSource final : public BatchSource {
 public:
  explicit ReuseSource(LabeledDataset data) : data_(std::move(data)) {}
  LabeledDataset next_batch(std::size_t) override { return data_; }

 private:
  LabeledDataset data_;
};

struct LearnerConfig {
  double epsilon = 0.1;
  double eta = 0.0;
  double delta = 0.05;
  double lambda = -1.0;    // negative means eta + epsilon/6
  std::size_t T = 0;       // 0 means the per-mode default
  std::size_t test_set_size = 0;  // sizing hint when the learner splits data
  std::size_t batch_size = 0;     // 0 means a default from epsilon
  double gamma = 0.1;      // margin lower bound for cutting-plane budgets
  std::uint64_t seed = 0;
  GDConfig::StepRule step_rule = GDConfig::StepRule::inv_sqrt_t;
  double step = 0.05;      // used when step_rule == constant

  double lambda_or_default() const {
    return lambda >= 0.0 ? lambda : eta + epsilon / 6.0;
  }

  std::size_t batch_or_default() const {
    if (batch_size > 0) return batch_size;
    return static_cast<std::size_t>(
        std::ceil(8.0 * std::log(200.0) / (epsilon * epsilon)));
  }

  void validate() const {
    if (!(epsilon > 0.0) || epsilon >= 1.0)
      throw std::invalid_argument("learner: epsilon must be in (0,1)");
    if (!(delta > 0.0) || delta >= 1.0)
      throw std::invalid_argument("learner: delta must be in (0,1)");
    if (eta < 0.0 || eta >= 0.5)
      throw std::invalid_argument("learner: eta must be in [0, 1/2)");
    if (eta + epsilon / 6.0 > 0.5 + 1e-12)
      throw std::invalid_argument(
          "learner: eta + epsilon/6 must be at most 1/2");
  }
};

struct LearnerReport {
  Halfspace final;
  std::size_t iterations_used = 0;
  std::vector<double> test_error_trace;
  std::size_t oracle_calls = 0;
  enum class StopReason { test_pass, budget_exhausted, cutting_plane_converged };
  StopReason stop_reason = StopReason::budget_exhausted;
};

inline const char *to_string(LearnerReport::StopReason r) {
  switch (r) {
    case LearnerReport::StopReason::test_pass:
      return "test_pass";
    case LearnerReport::StopReason::budget_exhausted:
      return "budget_exhausted";
    case LearnerReport::StopReason::cutting_plane_converged:
      return "cutting_plane_converged";
  }
  return "?";
}

namespace detail {

// Budget-exhausted runs return the iterate with the best held-out error.
struct BestTracker {
  double best_err = std::numeric_limits<double>::infinity();
  Halfspace best;

  void observe(double err, const Halfspace &w) {
    if (err < best_err) {
      best_err = err;
      best = w;
    }
  }
};

inline std::size_t default_gd_budget(const LearnerConfig &cfg) {
  const double t =
      145.0 / (cfg.gamma * cfg.gamma * cfg.epsilon * cfg.epsilon);
  return static_cast<std::size_t>(std::ceil(std::min(t, 1e7)));
}

inline std::size_t default_cutting_budget(const LearnerConfig &cfg,
                                          Eigen::Index d) {
  const double t = 16.0 * static_cast<double>(d) *
                   std::log(static_cast<double>(d) /
                            (cfg.gamma * cfg.epsilon));
  return static_cast<std::size_t>(std::ceil(std::max(t, 16.0)));
}

}  // namespace detail

// Gradient-descent learner: test on held-out data each round, and when the
// test fails, step against the slab-restricted surrogate subgradient.
template <typename OracleFn>
LearnerReport filtertron_loop(BatchSource &train_source,
                              const LabeledDataset &test_data,
                              const LearnerConfig &cfg, OracleFn &&oracle,
                              double stop_threshold) {
  cfg.validate();
  const std::size_t T = cfg.T > 0 ? cfg.T : detail::default_gd_budget(cfg);
  const std::size_t batch = cfg.batch_or_default();
  GDConfig gd;
  gd.T = T;
  gd.step_rule = cfg.step_rule;
  gd.step = cfg.step;

  LearnerReport report;
  detail::BestTracker best;
  Halfspace w(Vec::Zero(test_data.dimension));
  for (std::size_t t = 1; t <= T; ++t) {
    const double err = zero_one_error(w, test_data);
    report.test_error_trace.push_back(err);
    report.iterations_used = t;
    best.observe(err, w);
    if (err < stop_threshold) {
      report.final = w;
      report.stop_reason = LearnerReport::StopReason::test_pass;
      return report;
    }
    LabeledDataset fresh;
    try {
      fresh = train_source.next_batch(batch);
      ++report.oracle_calls;
      Vec g = oracle(fresh, w, t);
      w = Halfspace(projected_gd_step(w.w, g, t, gd));
    } catch (const SourceExhaustedError &) {
      break;
    } catch (const BoostBudgetError &) {
      break;
    }
  }
  report.final = best.best;
  report.stop_reason = LearnerReport::StopReason::budget_exhausted;
  return report;
}

inline LearnerReport filtertron(BatchSource &train_source,
                                const LabeledDataset &test_data,
                                const LearnerConfig &cfg) {
  const double lambda = cfg.lambda_or_default();
  const std::size_t T = cfg.T > 0 ? cfg.T : detail::default_gd_budget(cfg);
  auto oracle = [&](const LabeledDataset &batch, const Halfspace &w,
                    std::size_t) {
    auto dir = find_descent_direction(batch, w, cfg.epsilon / 6.0,
                                      cfg.delta / (2.0 * static_cast<double>(T)),
                                      lambda);
    return dir.g;
  };
  return filtertron_loop(train_source, test_data, cfg, oracle,
                         cfg.eta + cfg.epsilon / 2.0);
}

// Mirror-descent variant for l1-margin instances (sparse targets); the state
// lives on the 2d lifted simplex and decodes into the l1 ball.
inline LearnerReport filtertron_mirror(BatchSource &train_source,
                                       const LabeledDataset &test_data,
                                       const LearnerConfig &cfg) {
  cfg.validate();
  const double lambda = cfg.lambda_or_default();
  const std::size_t T = cfg.T > 0 ? cfg.T : detail::default_gd_budget(cfg);
  const std::size_t batch = cfg.batch_or_default();
  auto mirror_cfg = MirrorConfig::for_horizon(test_data.dimension, T);

  LearnerReport report;
  detail::BestTracker best;
  MirrorState state = MirrorState::uniform(test_data.dimension);
  for (std::size_t t = 1; t <= T; ++t) {
    Halfspace w(state.decode());
    const double err = zero_one_error(w, test_data);
    report.test_error_trace.push_back(err);
    report.iterations_used = t;
    best.observe(err, w);
    if (err < cfg.eta + cfg.epsilon / 2.0) {
      report.final = w;
      report.stop_reason = LearnerReport::StopReason::test_pass;
      return report;
    }
    LabeledDataset fresh;
    try {
      fresh = train_source.next_batch(batch);
    } catch (const SourceExhaustedError &) {
      break;
    }
    ++report.oracle_calls;
    auto dir = find_descent_direction(fresh, w, cfg.epsilon / 6.0,
                                      cfg.delta / (2.0 * static_cast<double>(T)),
                                      lambda);
    state = mirror_descent_step(state, dir.g, t, mirror_cfg);
  }
  report.final = best.best;
  report.stop_reason = LearnerReport::StopReason::budget_exhausted;
  return report;
}

struct CuttingDegenerateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Cutting-plane variant: the ellipsoid engine replaces gradient descent. The
// cuts from the slab oracle have margin Omega(eps*gamma), so a small ball
// around the optimum stays feasible and the center must eventually pass.
template <typename OracleFn>
LearnerReport cutting_plane_loop(const LabeledDataset &test_data,
                                 const LearnerConfig &cfg, OracleFn &&oracle,
                                 double stop_threshold, std::size_t T,
                                 double radius, bool degenerate_is_error) {
  cfg.validate();
  LearnerReport report;
  detail::BestTracker best;
  EllipsoidState ell = EllipsoidState::ball(test_data.dimension, radius);
  for (std::size_t t = 1; t <= T; ++t) {
    report.iterations_used = t;
    const double center_norm = ell.center.norm();
    if (center_norm > radius + 1e-12) {
      // feasibility cut back toward the radius ball; not an oracle call
      try {
        ell = ellipsoid_cut(ell, Vec(ell.center / center_norm));
      } catch (const EllipsoidDegenerateError &e) {
        if (degenerate_is_error) throw CuttingDegenerateError(e.what());
        break;
      }
      continue;
    }
    Halfspace w(center_norm > 1.0 ? Vec(ell.center / center_norm)
                                  : ell.center);
    const double err = zero_one_error(w, test_data);
    report.test_error_trace.push_back(err);
    best.observe(err, w);
    if (err < stop_threshold) {
      report.final = w;
      report.stop_reason = LearnerReport::StopReason::test_pass;
      return report;
    }
    try {
      ++report.oracle_calls;
      Vec g = oracle(w, t);
      ell = ellipsoid_cut(ell, g);
    } catch (const EllipsoidDegenerateError &e) {
      if (degenerate_is_error) throw CuttingDegenerateError(e.what());
      break;
    } catch (const SourceExhaustedError &) {
      break;
    } catch (const BoostBudgetError &) {
      break;
    }
    if (ell.P.trace() < 1e-18) {
      if (degenerate_is_error)
        throw CuttingDegenerateError(
            "cutting-plane ellipsoid collapsed before any iterate passed "
            "the test; the data violate the margin noise contract");
      report.final = best.best;
      report.stop_reason =
          LearnerReport::StopReason::cutting_plane_converged;
      return report;
    }
  }
  report.final = best.best;
  report.stop_reason = LearnerReport::StopReason::budget_exhausted;
  return report;
}

inline LearnerReport filtertron_cutting(BatchSource &train_source,
                                        const LabeledDataset &test_data,
                                        const LearnerConfig &cfg) {
  const double lambda = cfg.lambda_or_default();
  const std::size_t T =
      cfg.T > 0 ? cfg.T
                : detail::default_cutting_budget(cfg, test_data.dimension);
  const std::size_t batch = cfg.batch_or_default();
  const double slack = cfg.epsilon * cfg.gamma / 8.0;
  auto oracle = [&](const Halfspace &w, std::size_t) {
    LabeledDataset fresh = train_source.next_batch(batch);
    auto dir = find_descent_direction(fresh, w, cfg.epsilon / 6.0,
                                      cfg.delta / (2.0 * static_cast<double>(T)),
                                      lambda);
    return dir.g;
  };
  return cutting_plane_loop(test_data, cfg, oracle,
                            cfg.eta + cfg.epsilon / 2.0, T, 1.0 + slack,
                            /*degenerate_is_error=*/true);
}

// No-margin proper learner: ellipsoid over the unit ball with cuts from the
// rescale-and-remove-outliers oracle; lambda = eta + epsilon.
inline LearnerReport learn_general_halfspace(const LabeledDataset &data,
                                             const LearnerConfig &cfg,
                                             double bit_scale) {
  cfg.validate();
  const double lambda = cfg.eta + cfg.epsilon;
  if (lambda > 0.5 + 1e-12)
    throw std::invalid_argument(
        "learn_general_halfspace: eta + epsilon must be at most 1/2");
  const std::size_t m =
      cfg.test_set_size > 0
          ? cfg.test_set_size
          : static_cast<std::size_t>(
                std::ceil(std::log(4.0 / cfg.delta) /
                          (cfg.epsilon * cfg.epsilon)));
  const double frac = std::min(
      0.5, static_cast<double>(m) / static_cast<double>(data.size()));
  auto [train_data, test_data] = train_test_split(data, frac, cfg.seed);

  const std::size_t T =
      cfg.T > 0 ? cfg.T
                : static_cast<std::size_t>(std::ceil(
                      100.0 * static_cast<double>(data.dimension) *
                      static_cast<double>(data.dimension) *
                      (bit_scale + std::log(1.0 / cfg.epsilon))));
  auto oracle = [&](const Halfspace &w, std::size_t t) {
    auto dir = general_halfspace_oracle(
        train_data, w, cfg.epsilon,
        cfg.delta / static_cast<double>(std::max<std::size_t>(T, 1)), lambda);
    (void)t;
    return dir.g;
  };
  return cutting_plane_loop(test_data, cfg, oracle, cfg.eta + cfg.epsilon + 1e-12,
                            T, 1.0, /*degenerate_is_error=*/false);
}

enum class DistillMode { gd, cutting, ellipsoid_general };

// Runs the chosen proper learner with every oracle call restricted to the
// current teacher/student disagreement set. The held-out stopping rule is
// relative to the teacher's measured error.
inline LearnerReport distill(const Classifier &teacher,
                             BatchSource &train_source,
                             const LabeledDataset &test_data,
                             const LearnerConfig &cfg, DistillMode mode) {
  cfg.validate();
  const double lambda = cfg.lambda_or_default();
  const double teacher_err = zero_one_error(teacher, test_data);
  const double stop = teacher_err + cfg.epsilon / 2.0;
  const std::size_t min_cond = std::max<std::size_t>(
      16, static_cast<std::size_t>(std::ceil(
              std::log(4.0 / cfg.delta) / (cfg.epsilon * cfg.epsilon) / 50.0)));

  auto boosted = [&](const LabeledDataset &batch, const Halfspace &w,
                     std::size_t T_total) {
    auto inner = [&](const LabeledDataset &cond, const Halfspace &w0) {
      if (mode == DistillMode::ellipsoid_general)
        return general_halfspace_oracle(
            cond, w0, cfg.epsilon,
            cfg.delta / static_cast<double>(std::max<std::size_t>(T_total, 1)),
            cfg.eta + cfg.epsilon);
      return find_descent_direction(
          cond, w0, cfg.epsilon / 6.0,
          cfg.delta / (2.0 * static_cast<double>(std::max<std::size_t>(T_total, 1))),
          lambda);
    };
    return boost_oracle(teacher, batch, w, inner, batch.size(), min_cond);
  };

  LearnerReport report;
  switch (mode) {
    case DistillMode::gd: {
      const std::size_t T = cfg.T > 0 ? cfg.T : detail::default_gd_budget(cfg);
      auto oracle = [&](const LabeledDataset &batch, const Halfspace &w,
                        std::size_t) { return boosted(batch, w, T).g; };
      report = filtertron_loop(train_source, test_data, cfg, oracle, stop);
      break;
    }
    case DistillMode::cutting: {
      const std::size_t T =
          cfg.T > 0 ? cfg.T
                    : detail::default_cutting_budget(cfg, test_data.dimension);
      const std::size_t batch_n = cfg.batch_or_default();
      auto oracle = [&](const Halfspace &w, std::size_t) {
        LabeledDataset fresh = train_source.next_batch(batch_n);
        return boosted(fresh, w, T).g;
      };
      report = cutting_plane_loop(test_data, cfg, oracle, stop, T,
                                  1.0 + cfg.epsilon * cfg.gamma / 8.0,
                                  /*degenerate_is_error=*/false);
      break;
    }
    case DistillMode::ellipsoid_general: {
      const std::size_t T =
          cfg.T > 0 ? cfg.T
                    : static_cast<std::size_t>(
                          100 * test_data.dimension * test_data.dimension);
      const std::size_t batch_n = cfg.batch_or_default();
      auto oracle = [&](const Halfspace &w, std::size_t) {
        LabeledDataset fresh = train_source.next_batch(batch_n);
        return boosted(fresh, w, T).g;
      };
      report = cutting_plane_loop(test_data, cfg, oracle, stop, T, 1.0,
                                  /*degenerate_is_error=*/false);
      break;
    }
  }
  // A dried-up disagreement set ends the loop without a pass; that is
  // evidence the student tracks the teacher, so re-verify on held-out data.
  if (report.stop_reason == LearnerReport::StopReason::budget_exhausted) {
    const double err = zero_one_error(report.final, test_data);
    if (err < teacher_err + cfg.epsilon / 2.0)
      report.stop_reason = LearnerReport::StopReason::test_pass;
  }
  return report;
}

}  // namespace massart
