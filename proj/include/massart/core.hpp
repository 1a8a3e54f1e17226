#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "massart/rng.hpp"

namespace massart {

using Vec = Eigen::VectorXd;
using Classifier = std::function<int(const Vec &)>;

// Sign convention used everywhere: sgn(0) = +1.
inline int sgn(double v) { return v >= 0.0 ? 1 : -1; }

struct EmptyRegionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LabeledExample {
  Vec x;
  int y = 1;
  std::optional<int> clean_y;
  std::optional<bool> flipped;
};

// Finite sample with optional noise-free metadata. Group membership flags are
// carried per example (indexed in dataset order) so evaluation can condition
// on named subpopulations; learners never read clean_y/flipped/groups.
struct LabeledDataset {
  std::vector<LabeledExample> examples;
  Eigen::Index dimension = 0;
  double scale = 1.0;  // norm divisor applied during normalization
  std::map<std::string, std::vector<std::uint8_t>> groups;

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }

  void validate() const {
    for (std::size_t i = 0; i < examples.size(); ++i) {
      const auto &ex = examples[i];
      if (ex.x.size() != dimension)
        throw std::invalid_argument("dataset: example " + std::to_string(i) +
                                    " has dimension " +
                                    std::to_string(ex.x.size()) + ", expected " +
                                    std::to_string(dimension));
      if (!ex.x.allFinite())
        throw std::invalid_argument("dataset: example " + std::to_string(i) +
                                    " has non-finite coordinates");
      if (ex.y != 1 && ex.y != -1)
        throw std::invalid_argument("dataset: label must be +1 or -1");
      if (ex.clean_y && ex.flipped && *ex.flipped != (ex.y != *ex.clean_y))
        throw std::invalid_argument("dataset: flipped flag inconsistent");
    }
    for (const auto &[name, flags] : groups)
      if (flags.size() != examples.size())
        throw std::invalid_argument("dataset: group '" + name +
                                    "' has wrong length");
  }
};

inline LabeledDataset dataset_from(std::vector<LabeledExample> examples,
                                   Eigen::Index dimension) {
  LabeledDataset ds;
  ds.examples = std::move(examples);
  ds.dimension = dimension;
  ds.validate();
  return ds;
}

inline LabeledDataset dataset_subset(const LabeledDataset &ds,
                                     const std::vector<std::size_t> &idx) {
  LabeledDataset out;
  out.dimension = ds.dimension;
  out.scale = ds.scale;
  out.examples.reserve(idx.size());
  for (std::size_t i : idx) out.examples.push_back(ds.examples.at(i));
  for (const auto &[name, flags] : ds.groups) {
    std::vector<std::uint8_t> sub;
    sub.reserve(idx.size());
    for (std::size_t i : idx) sub.push_back(flags.at(i));
    out.groups.emplace(name, std::move(sub));
  }
  return out;
}

struct Halfspace {
  Vec w;
  double bias = 0.0;

  Halfspace() = default;
  explicit Halfspace(Vec weights, double b = 0.0)
      : w(std::move(weights)), bias(b) {}

  double score(const Vec &x) const { return w.dot(x) + bias; }
  int predict(const Vec &x) const { return sgn(score(x)); }
};

inline Classifier as_classifier(const Halfspace &h) {
  return [h](const Vec &x) { return h.predict(x); };
}

struct MarginSpec {
  enum class NormKind { euclidean, l1_dual_linf };
  double gamma = 0.0;
  NormKind norm_kind = NormKind::euclidean;

  void validate() const {
    if (!(gamma > 0.0) || gamma > 1.0)
      throw std::invalid_argument("margin gamma must be in (0,1]");
  }
};

struct Metrics {
  double zero_one_error = 0.0;
  std::map<std::string, double> per_group_error;
  std::optional<double> opt_reference;
};

// Generalized filter over a dataset: either conditioning on an index subset or
// a nonnegative reweighting normalized to mean one.
class Filter {
 public:
  enum class Kind { All, Indices, Weights };

  static Filter all() { return Filter(Kind::All); }

  static Filter from_indices(std::vector<std::size_t> idx) {
    Filter f(Kind::Indices);
    f.indices_ = std::move(idx);
    return f;
  }

  static Filter from_weights(std::vector<double> w) {
    double sum = 0.0;
    for (double c : w) {
      if (!(c >= 0.0) || !std::isfinite(c))
        throw std::invalid_argument("filter weights must be nonnegative");
      sum += c;
    }
    if (sum <= 0.0)
      throw EmptyRegionError("filter weights are identically zero");
    const double mean = sum / static_cast<double>(w.size());
    for (double &c : w) c /= mean;
    Filter f(Kind::Weights);
    f.weights_ = std::move(w);
    return f;
  }

  Kind kind() const { return kind_; }
  const std::vector<std::size_t> &indices() const { return indices_; }
  const std::vector<double> &weights() const { return weights_; }

  // Applies fn(index, weight) over retained examples. Throws if the filter
  // retains nothing or does not match the dataset size.
  template <typename Fn>
  void for_each(const LabeledDataset &ds, Fn &&fn) const {
    switch (kind_) {
      case Kind::All:
        for (std::size_t i = 0; i < ds.size(); ++i) fn(i, 1.0);
        return;
      case Kind::Indices:
        if (indices_.empty())
          throw EmptyRegionError("filter retains no examples");
        for (std::size_t i : indices_) {
          if (i >= ds.size())
            throw std::invalid_argument("filter index out of range");
          fn(i, 1.0);
        }
        return;
      case Kind::Weights:
        if (weights_.size() != ds.size())
          throw std::invalid_argument("filter weight length mismatch");
        for (std::size_t i = 0; i < ds.size(); ++i)
          if (weights_[i] > 0.0) fn(i, weights_[i]);
        return;
    }
  }

 private:
  explicit Filter(Kind k) : kind_(k) {}
  Kind kind_;
  std::vector<std::size_t> indices_;
  std::vector<double> weights_;
};

inline Vec project_unit_ball(const Vec &v) {
  if (!v.allFinite())
    throw std::invalid_argument("project_unit_ball: non-finite input");
  const double n = v.norm();
  if (n <= 1.0) return v;
  return v / n;
}

inline double zero_one_error(const Classifier &h, const LabeledDataset &data,
                             const std::optional<Filter> &region = std::nullopt) {
  if (data.empty()) throw EmptyRegionError("zero_one_error: empty dataset");
  double wrong = 0.0, total = 0.0;
  const Filter &f = region ? *region : Filter::all();
  f.for_each(data, [&](std::size_t i, double c) {
    total += c;
    if (h(data.examples[i].x) != data.examples[i].y) wrong += c;
  });
  if (total <= 0.0)
    throw EmptyRegionError("zero_one_error: region retains no examples");
  return wrong / total;
}

inline double zero_one_error(const Halfspace &h, const LabeledDataset &data,
                             const std::optional<Filter> &region = std::nullopt) {
  return zero_one_error(as_classifier(h), data, region);
}

// Scales every point by 1/max(1, max norm); labels untouched.
inline std::pair<LabeledDataset, double> normalize_dataset(
    const LabeledDataset &data) {
  if (data.empty())
    throw std::invalid_argument("normalize_dataset: empty dataset");
  double max_norm = 0.0;
  for (const auto &ex : data.examples) max_norm = std::max(max_norm, ex.x.norm());
  const double scale = std::max(1.0, max_norm);
  LabeledDataset out = data;
  if (scale > 1.0)
    for (auto &ex : out.examples) ex.x /= scale;
  out.scale = scale;
  return {std::move(out), scale};
}

inline std::pair<LabeledDataset, LabeledDataset> train_test_split(
    const LabeledDataset &data, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0) || !(test_fraction < 1.0))
    throw std::invalid_argument("train_test_split: fraction must be in (0,1)");
  const std::size_t n = data.size();
  if (n < 2)
    throw std::invalid_argument("train_test_split: need at least 2 examples");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  auto n_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(n)));
  n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
  std::vector<std::size_t> test_idx(idx.begin(), idx.begin() + n_test);
  std::vector<std::size_t> train_idx(idx.begin() + n_test, idx.end());
  return {dataset_subset(data, train_idx), dataset_subset(data, test_idx)};
}

}  // namespace massart
