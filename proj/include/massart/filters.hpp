#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "massart/loss.hpp"

namespace massart {

// Slab along w: {x : |<w,x>| <= r}. Closed at r so every candidate slab
// contains its defining point.
struct SlabFilter {
  Vec w;
  double r = 0.0;

  bool contains(const Vec &x) const { return std::abs(w.dot(x)) <= r; }

  Filter select(const LabeledDataset &ds) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < ds.size(); ++i)
      if (contains(ds.examples[i].x)) idx.push_back(i);
    return Filter::from_indices(std::move(idx));
  }
};

// Annulus {x : |<w,x>| >= tau}; side +1/-1 restricts to the corresponding
// affine half {<w,x> >= tau} / {<w,x> <= -tau}.
struct AnnulusFilter {
  Vec w;
  double tau = 0.0;
  int side = 0;

  bool contains(const Vec &x) const {
    const double s = w.dot(x);
    if (side > 0) return s >= tau;
    if (side < 0) return s <= -tau;
    return std::abs(s) >= tau;
  }

  Filter select(const LabeledDataset &ds) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < ds.size(); ++i)
      if (contains(ds.examples[i].x)) idx.push_back(i);
    return Filter::from_indices(std::move(idx));
  }
};

struct DescentDirection {
  Vec g;
  std::string achieved_filter;
  double empirical_loss_at_w = 0.0;
};

struct OutlierCertificate {
  std::vector<std::size_t> kept_indices;
  double beta = 0.0;
  Eigen::MatrixXd second_moment;  // of the kept points, no ridge
  double removed_fraction = 0.0;
};

struct NoCandidateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OutlierBudgetError : std::runtime_error {
  OutlierCertificate progress;
  OutlierBudgetError(const std::string &msg, OutlierCertificate state)
      : std::runtime_error(msg), progress(std::move(state)) {}
};

struct BoostBudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// Leverage scores x^T pinv(Sigma) x for the kept rows, with a relative ridge
// for pseudoinverse stability.
inline Eigen::MatrixXd ridge_inverse(const Eigen::MatrixXd &sigma) {
  const double tr = sigma.trace();
  const auto d = sigma.rows();
  Eigen::MatrixXd reg = sigma;
  if (tr > 0.0) reg += (1e-12 * tr) * Eigen::MatrixXd::Identity(d, d);
  return reg.ldlt().solve(Eigen::MatrixXd::Identity(d, d));
}

}  // namespace detail

// Iteratively removes the point of largest leverage until every kept x
// satisfies x^T pinv(Sigma) x <= beta, Sigma the kept second-moment matrix.
// Together with Cauchy-Schwarz this certifies sup_kept <w,x>^2 <=
// beta * mean_kept <w,x>^2 simultaneously for every direction w.
inline OutlierCertificate outlier_removal(
    const std::vector<Vec> &points, double epsilon,
    std::optional<double> beta_target = std::nullopt) {
  if (points.size() < 2)
    throw std::invalid_argument("outlier_removal: need at least 2 points");
  if (!(epsilon > 0.0) || epsilon >= 1.0)
    throw std::invalid_argument("outlier_removal: epsilon must be in (0,1)");
  const auto d = points.front().size();
  const double beta =
      std::max(4.0 * static_cast<double>(d), beta_target.value_or(0.0));
  const std::size_t n = points.size();
  const auto max_removals =
      static_cast<std::size_t>(std::floor(epsilon * static_cast<double>(n)));

  std::vector<std::size_t> kept(n);
  std::iota(kept.begin(), kept.end(), 0);
  std::size_t removed = 0;

  auto moment_of = [&](const std::vector<std::size_t> &idx) {
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t i : idx) sigma += points[i] * points[i].transpose();
    return Eigen::MatrixXd(sigma / static_cast<double>(idx.size()));
  };

  while (true) {
    Eigen::MatrixXd sigma = moment_of(kept);
    if (sigma.trace() <= 0.0) break;  // all kept points are zero
    Eigen::MatrixXd inv = detail::ridge_inverse(sigma);
    double q_max = -1.0;
    std::size_t arg = 0;
    for (std::size_t pos = 0; pos < kept.size(); ++pos) {
      const Vec &x = points[kept[pos]];
      const double q = x.dot(inv * x);
      if (q > q_max) {
        q_max = q;
        arg = pos;
      }
    }
    if (q_max <= beta) break;
    if (removed + 1 > max_removals) {
      OutlierCertificate state{kept, beta, sigma,
                               static_cast<double>(removed) /
                                   static_cast<double>(n)};
      throw OutlierBudgetError(
          "outlier_removal: cannot reach beta=" + std::to_string(beta) +
              " within removal budget eps=" + std::to_string(epsilon),
          std::move(state));
    }
    kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(arg));
    ++removed;
  }

  OutlierCertificate cert;
  cert.kept_indices = std::move(kept);
  cert.beta = beta;
  cert.second_moment = moment_of(cert.kept_indices);
  cert.removed_fraction =
      static_cast<double>(removed) / static_cast<double>(n);
  return cert;
}

// Searches candidate radii (the distinct empirical |<w,x_i>| whose slab holds
// mass >= epsilon), takes the one maximizing the conditional surrogate loss
// (ties to the smallest radius), and returns the filtered subgradient there.
inline DescentDirection find_descent_direction(const LabeledDataset &data,
                                               const Halfspace &w,
                                               double epsilon, double delta,
                                               double lambda) {
  (void)delta;  // failure probability only enters through the sample size
  if (data.empty())
    throw NoCandidateError("find_descent_direction: empty dataset");
  if (!(epsilon > 0.0) || epsilon >= 0.5)
    throw std::invalid_argument(
        "find_descent_direction: epsilon must be in (0, 1/2)");
  const std::size_t n = data.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> margin(n), loss(n);
  for (std::size_t i = 0; i < n; ++i) {
    margin[i] = std::abs(w.score(data.examples[i].x));
    loss[i] = sample_loss(w, data.examples[i], lambda);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return margin[a] < margin[b];
                   });

  const double min_count = epsilon * static_cast<double>(n) - 1e-9;
  double prefix = 0.0;
  double best_loss = 0.0, best_r = 0.0;
  std::size_t best_count = 0;
  bool found = false;
  for (std::size_t pos = 0; pos < n; ++pos) {
    prefix += loss[order[pos]];
    const bool last_of_tie =
        pos + 1 == n || margin[order[pos + 1]] > margin[order[pos]];
    if (!last_of_tie) continue;
    const auto count = pos + 1;
    if (static_cast<double>(count) < min_count) continue;
    const double mean = prefix / static_cast<double>(count);
    if (!found || mean > best_loss + 1e-15) {
      found = true;
      best_loss = mean;
      best_r = margin[order[pos]];
      best_count = count;
    }
  }
  if (!found)
    throw NoCandidateError(
        "find_descent_direction: no slab reaches mass epsilon");

  std::vector<std::size_t> slab_idx(order.begin(),
                                    order.begin() + static_cast<std::ptrdiff_t>(best_count));
  std::sort(slab_idx.begin(), slab_idx.end());
  DescentDirection dir;
  dir.g = filtered_subgradient(w, data, Filter::from_indices(slab_idx),
                               LossConfig(lambda));
  dir.empirical_loss_at_w = best_loss;
  std::ostringstream desc;
  desc << "slab r=" << best_r << " count=" << best_count;
  dir.achieved_filter = desc.str();
  return dir;
}

// Rescales every point to x/|<w,x>|, removes outliers among the rescaled
// points, and returns the surrogate subgradient over the survivors. The
// returned direction is scaled into the unit ball; only its orientation
// matters to a cutting-plane consumer.
inline DescentDirection general_halfspace_oracle(const LabeledDataset &data,
                                                 const Halfspace &w,
                                                 double epsilon, double delta,
                                                 double lambda,
                                                 bool allow_perturb = true,
                                                 std::optional<double> beta_target = std::nullopt) {
  (void)delta;
  if (data.empty())
    throw std::invalid_argument("general_halfspace_oracle: empty dataset");
  if (!(epsilon > 0.0) || epsilon >= 0.5)
    throw std::invalid_argument(
        "general_halfspace_oracle: epsilon must be in (0, 1/2)");

  Halfspace wp = w;
  Rng perturb_rng(0x5eedb00c);  // fixed stream so the perturbation is reproducible
  for (int attempt = 0; attempt < 4; ++attempt) {
    bool has_zero = false;
    for (const auto &ex : data.examples)
      if (wp.score(ex.x) == 0.0) {
        has_zero = true;
        break;
      }
    if (!has_zero) break;
    if (!allow_perturb)
      throw std::invalid_argument(
          "general_halfspace_oracle: zero inner product and perturbation "
          "disabled");
    Vec u(data.dimension);
    for (Eigen::Index j = 0; j < u.size(); ++j) u(j) = normal(perturb_rng);
    u.normalize();
    wp.w = wp.w + std::ldexp(1.0, -40) * u;
    if (attempt == 3)
      throw std::runtime_error(
          "general_halfspace_oracle: could not clear zero inner products");
  }

  LabeledDataset rescaled = data;
  std::vector<Vec> pts;
  pts.reserve(data.size());
  for (auto &ex : rescaled.examples) {
    ex.x = ex.x / std::abs(wp.score(ex.x));
    pts.push_back(ex.x);
  }

  if (!beta_target) {
    // d*b/eps shape with b read off the dynamic range of the rescaled points
    std::vector<double> norms;
    norms.reserve(pts.size());
    for (const auto &p : pts) norms.push_back(p.norm());
    std::nth_element(norms.begin(), norms.begin() + norms.size() / 2,
                     norms.end());
    const double med = std::max(norms[norms.size() / 2], 1e-12);
    const double top = *std::max_element(norms.begin(), norms.end());
    const double b_hat = std::log2(2.0 + top / med);
    beta_target = static_cast<double>(data.dimension) * b_hat / epsilon;
  }
  auto cert = outlier_removal(pts, epsilon / 2.0, beta_target);
  Filter survivors = Filter::from_indices(cert.kept_indices);
  DescentDirection dir;
  Vec g = filtered_subgradient(wp, rescaled, survivors, LossConfig(lambda));
  dir.empirical_loss_at_w = filtered_loss(wp, rescaled, survivors, lambda);
  dir.g = g.norm() > 1.0 ? Vec(g / g.norm()) : g;
  std::ostringstream desc;
  desc << "rescaled+outlier_removal kept=" << cert.kept_indices.size() << "/"
       << data.size() << " beta=" << cert.beta;
  dir.achieved_filter = desc.str();
  return dir;
}

// Restricts to the teacher/student disagreement set (drawn from the dataset
// in order, without replacement) and runs the inner oracle there.
template <typename Oracle>
DescentDirection boost_oracle(const Classifier &teacher,
                              const LabeledDataset &data, const Halfspace &w,
                              Oracle &&inner_oracle, std::size_t sample_budget,
                              std::size_t min_conditional) {
  const std::size_t limit = std::min(sample_budget, data.size());
  std::vector<std::size_t> disagree;
  for (std::size_t i = 0; i < limit; ++i) {
    const Vec &x = data.examples[i].x;
    if (teacher(x) != w.predict(x)) disagree.push_back(i);
  }
  if (disagree.size() < min_conditional)
    throw BoostBudgetError(
        "boost_oracle: only " + std::to_string(disagree.size()) +
        " disagreement samples within budget (need " +
        std::to_string(min_conditional) + ")");
  LabeledDataset conditional = dataset_subset(data, disagree);
  DescentDirection dir = inner_oracle(conditional, w);
  dir.achieved_filter = "disagreement(" + std::to_string(disagree.size()) +
                        ") -> " + dir.achieved_filter;
  return dir;
}

}  // namespace massart
