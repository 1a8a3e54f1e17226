#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "massart/baselines.hpp"
#include "massart/csq.hpp"
#include "massart/glm.hpp"
#include "massart/learners.hpp"
#include "massart/noise.hpp"

namespace massart::harness {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// formatting and hashing

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::uint64_t fnv1a(const std::string &s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

inline json load_json(const std::string &path) {
  return json::parse(read_file(path));
}

// ---------------------------------------------------------------------------
// synthetic instances

struct SyntheticInstance {
  LabeledDataset data;  // clean labels, normalized into the unit ball
  Halfspace w_star;     // planted direction in normalized coordinates
};

// Half-and-half mixture of a round gaussian and a strongly anisotropic one,
// labeled by the sign of the first coordinate, then scaled into the ball.
// The anisotropic component's long axis (variance 8, with cross-covariance
// 0.1 and short-axis variance 0.024) lies orthogonal to the labeling
// direction; that orientation is what lets a region-dependent adversary
// plant a spurious correlation that fixed-surrogate learners chase.
inline LabeledDataset gen_synthetic_mixture(std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_synthetic_mixture: n >= 1");
  Rng rng(seed);
  // second component covariance [[0.024, 0.1], [0.1, 8]] via Cholesky
  const double a11 = std::sqrt(0.024);
  const double a21 = 0.1 / a11;
  const double a22 = std::sqrt(8.0 - a21 * a21);
  std::vector<LabeledExample> ex;
  ex.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z1 = normal(rng), z2 = normal(rng);
    Vec x(2);
    if (uniform01(rng) < 0.5)
      x << z1, z2;
    else
      x << a11 * z1, a21 * z1 + a22 * z2;
    ex.push_back({x, sgn(x(0)), std::nullopt, std::nullopt});
  }
  auto [normalized, scale] = normalize_dataset(dataset_from(std::move(ex), 2));
  (void)scale;
  return std::move(normalized);
}

inline SyntheticInstance gen_margin_halfspace(int d, double gamma,
                                              std::size_t n,
                                              std::uint64_t seed) {
  Rng rng(seed);
  Vec w_star(d);
  for (int i = 0; i < d; ++i) w_star(i) = normal(rng);
  w_star.normalize();
  std::vector<LabeledExample> ex;
  ex.reserve(n);
  while (ex.size() < n) {
    Vec x(d);
    for (int i = 0; i < d; ++i) x(i) = normal(rng);
    x.normalize();
    x *= std::pow(uniform01(rng), 1.0 / d);
    if (std::abs(w_star.dot(x)) < gamma) continue;
    ex.push_back({x, sgn(w_star.dot(x)), std::nullopt, std::nullopt});
  }
  SyntheticInstance inst;
  inst.data = dataset_from(std::move(ex), d);
  inst.w_star = Halfspace(w_star);
  return inst;
}

// Integer grid points with an integer target direction; no margin floor
// beyond the one implied by integrality.
inline SyntheticInstance gen_integer_grid(int d, int coord_range,
                                          int wstar_bits, std::size_t n,
                                          std::uint64_t seed) {
  Rng rng(seed);
  const double w_cap = std::ldexp(1.0, wstar_bits - 1) - 1.0;
  Vec w_star(d);
  do {
    for (int i = 0; i < d; ++i)
      w_star(i) = std::floor(uniform01(rng) * (2.0 * w_cap + 1.0)) - w_cap;
  } while (w_star.norm() == 0.0);
  std::vector<LabeledExample> ex;
  ex.reserve(n);
  while (ex.size() < n) {
    Vec x(d);
    for (int i = 0; i < d; ++i)
      x(i) = std::floor(uniform01(rng) * (2.0 * coord_range + 1.0)) -
             coord_range;
    if (w_star.dot(x) == 0.0) continue;
    ex.push_back({x, sgn(w_star.dot(x)), std::nullopt, std::nullopt});
  }
  auto [normalized, scale] = normalize_dataset(dataset_from(std::move(ex), d));
  (void)scale;
  SyntheticInstance inst;
  inst.data = std::move(normalized);
  inst.w_star = Halfspace(Vec(w_star / w_star.norm()));
  return inst;
}

// Conjunction of the first k coordinates over {0,1}^d, with an appended
// constant coordinate so the separating hyperplane is affine.
inline SyntheticInstance gen_conjunction(int d, int k, std::size_t n,
                                         std::uint64_t seed) {
  if (k < 1 || k > d) throw std::invalid_argument("gen_conjunction: bad k");
  Rng rng(seed);
  std::vector<LabeledExample> ex;
  ex.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec x(d + 1);
    bool on = true;
    for (int j = 0; j < d; ++j) {
      x(j) = uniform01(rng) < (j < k ? 0.8 : 0.5) ? 1.0 : 0.0;
      if (j < k && x(j) < 0.5) on = false;
    }
    x(d) = 1.0;
    ex.push_back({x, on ? 1 : -1, std::nullopt, std::nullopt});
  }
  SyntheticInstance inst;
  inst.data = dataset_from(std::move(ex), d + 1);
  Vec w = Vec::Zero(d + 1);
  for (int j = 0; j < k; ++j) w(j) = 1.0;
  w(d) = 0.5 - static_cast<double>(k);
  inst.w_star = Halfspace(Vec(w / w.lpNorm<1>()));
  return inst;
}

// ---------------------------------------------------------------------------
// native dataset serialization (versioned CSV)

inline void write_dataset_csv(const LabeledDataset &ds,
                              const std::string &path,
                              const std::string &stamp = std::string()) {
  std::ostringstream out;
  out << "# massart-dataset v1 dim=" << ds.dimension
      << " scale=" << format_double(ds.scale);
  if (!stamp.empty()) out << " " << stamp;
  if (!ds.groups.empty()) {
    out << " groups=";
    bool first = true;
    for (const auto &[name, flags] : ds.groups) {
      if (!first) out << ";";
      out << name;
      first = false;
    }
  }
  out << "\n";
  for (Eigen::Index j = 0; j < ds.dimension; ++j) out << "f" << j << ",";
  out << "y,clean_y,flipped";
  for (const auto &[name, flags] : ds.groups) out << ",g:" << name;
  out << "\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto &e = ds.examples[i];
    for (Eigen::Index j = 0; j < ds.dimension; ++j)
      out << format_double(e.x(j)) << ",";
    out << e.y << ",";
    if (e.clean_y) out << *e.clean_y;
    out << ",";
    if (e.flipped) out << (*e.flipped ? 1 : 0);
    for (const auto &[name, flags] : ds.groups)
      out << "," << static_cast<int>(flags[i]);
    out << "\n";
  }
  write_file(path, out.str());
}

inline std::vector<std::string> split_csv_line(const std::string &line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

inline LabeledDataset read_dataset_csv(const std::string &path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line.rfind("# massart-dataset v1", 0) != 0)
    throw std::runtime_error("dataset: missing version header in " + path);
  Eigen::Index dim = 0;
  double scale = 1.0;
  std::vector<std::string> group_names;
  {
    std::istringstream hs(line.substr(2));
    std::string tok;
    while (hs >> tok) {
      if (tok.rfind("dim=", 0) == 0) dim = std::stol(tok.substr(4));
      if (tok.rfind("scale=", 0) == 0) scale = std::stod(tok.substr(6));
      if (tok.rfind("groups=", 0) == 0) {
        std::istringstream gs(tok.substr(7));
        std::string g;
        while (std::getline(gs, g, ';'))
          if (!g.empty()) group_names.push_back(g);
      }
    }
  }
  if (dim <= 0) throw std::runtime_error("dataset: bad dimension in " + path);
  if (!std::getline(in, line))
    throw std::runtime_error("dataset: missing column header in " + path);

  LabeledDataset ds;
  ds.dimension = dim;
  ds.scale = scale;
  for (const auto &g : group_names) ds.groups[g] = {};
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++row;
    auto cells = split_csv_line(line);
    const std::size_t expect = static_cast<std::size_t>(dim) + 3 + group_names.size();
    if (cells.size() != expect)
      throw std::runtime_error("dataset: row " + std::to_string(row) +
                               " has " + std::to_string(cells.size()) +
                               " cells, expected " + std::to_string(expect));
    LabeledExample e;
    e.x = Vec(dim);
    for (Eigen::Index j = 0; j < dim; ++j)
      e.x(j) = std::stod(cells[static_cast<std::size_t>(j)]);
    const auto base = static_cast<std::size_t>(dim);
    e.y = std::stoi(cells[base]);
    if (!cells[base + 1].empty()) e.clean_y = std::stoi(cells[base + 1]);
    if (!cells[base + 2].empty()) e.flipped = cells[base + 2] == "1";
    for (std::size_t g = 0; g < group_names.size(); ++g)
      ds.groups[group_names[g]].push_back(cells[base + 3 + g] == "1" ? 1 : 0);
    ds.examples.push_back(std::move(e));
  }
  ds.validate();
  return ds;
}

// ---------------------------------------------------------------------------
// schema-driven ingestion of external CSV files

struct CsvSchema {
  std::string label_column;
  std::string positive_label;
  std::vector<std::string> numeric_columns;
  std::vector<std::string> categorical_columns;
  std::map<std::string, std::pair<std::string, std::string>> groups;
  std::map<std::string, std::vector<std::string>> censor;

  static CsvSchema from_json(const json &j) {
    CsvSchema s;
    if (j.value("version", 0) != 1)
      throw std::invalid_argument("schema: unsupported version");
    s.label_column = j.at("label_column").get<std::string>();
    s.positive_label = j.at("positive_label").get<std::string>();
    for (const auto &c : j.value("numeric_columns", json::array()))
      s.numeric_columns.push_back(c.get<std::string>());
    for (const auto &c : j.value("categorical_columns", json::array()))
      s.categorical_columns.push_back(c.get<std::string>());
    if (j.contains("groups"))
      for (const auto &[name, g] : j.at("groups").items())
        s.groups[name] = {g.at("column").get<std::string>(),
                          g.at("equals").get<std::string>()};
    if (j.contains("censor"))
      for (const auto &[name, cols] : j.at("censor").items())
        for (const auto &c : cols)
          s.censor[name].push_back(c.get<std::string>());
    return s;
  }
};

struct IngestResult {
  LabeledDataset data;
  std::vector<std::string> feature_names;
  std::vector<std::string> feature_source;  // originating column per feature
};

inline IngestResult ingest_csv(const std::string &path,
                               const CsvSchema &schema) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("ingest: empty file " + path);
  auto header = split_csv_line(line);
  std::map<std::string, std::size_t> col_index;
  for (std::size_t i = 0; i < header.size(); ++i) col_index[header[i]] = i;
  auto need = [&](const std::string &c) {
    auto it = col_index.find(c);
    if (it == col_index.end())
      throw std::runtime_error("ingest: missing column '" + c + "' in " + path);
    return it->second;
  };
  const std::size_t label_at = need(schema.label_column);
  std::vector<std::size_t> numeric_at;
  for (const auto &c : schema.numeric_columns) numeric_at.push_back(need(c));
  std::vector<std::size_t> cat_at;
  for (const auto &c : schema.categorical_columns) cat_at.push_back(need(c));
  for (const auto &[gname, g] : schema.groups) need(g.first);

  std::vector<std::vector<std::string>> rows;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw std::runtime_error("ingest: row " + std::to_string(row_no) +
                               " has wrong cell count");
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw std::runtime_error("ingest: no data rows in " + path);

  // categorical levels in first-appearance order
  std::vector<std::vector<std::string>> levels(cat_at.size());
  for (const auto &r : rows)
    for (std::size_t c = 0; c < cat_at.size(); ++c) {
      const auto &v = r[cat_at[c]];
      auto &ls = levels[c];
      if (std::find(ls.begin(), ls.end(), v) == ls.end()) ls.push_back(v);
    }

  IngestResult out;
  for (std::size_t c = 0; c < numeric_at.size(); ++c) {
    out.feature_names.push_back(schema.numeric_columns[c]);
    out.feature_source.push_back(schema.numeric_columns[c]);
  }
  for (std::size_t c = 0; c < cat_at.size(); ++c)
    for (const auto &lv : levels[c]) {
      out.feature_names.push_back(schema.categorical_columns[c] + "=" + lv);
      out.feature_source.push_back(schema.categorical_columns[c]);
    }
  const auto dim = static_cast<Eigen::Index>(out.feature_names.size());

  // per-column min/max for [0,1] scaling of numerics
  std::vector<double> lo(numeric_at.size(),
                         std::numeric_limits<double>::infinity());
  std::vector<double> hi(numeric_at.size(),
                         -std::numeric_limits<double>::infinity());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < numeric_at.size(); ++c) {
      double v;
      try {
        v = std::stod(rows[r][numeric_at[c]]);
      } catch (...) {
        throw std::runtime_error("ingest: unparseable numeric cell at row " +
                                 std::to_string(r + 2) + " column '" +
                                 schema.numeric_columns[c] + "'");
      }
      lo[c] = std::min(lo[c], v);
      hi[c] = std::max(hi[c], v);
    }

  LabeledDataset ds;
  ds.dimension = dim;
  for (const auto &[gname, g] : schema.groups) ds.groups[gname] = {};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    LabeledExample e;
    e.x = Vec::Zero(dim);
    Eigen::Index f = 0;
    for (std::size_t c = 0; c < numeric_at.size(); ++c, ++f) {
      const double v = std::stod(rows[r][numeric_at[c]]);
      const double den = hi[c] - lo[c];
      e.x(f) = den > 0.0 ? (v - lo[c]) / den : 0.0;
    }
    for (std::size_t c = 0; c < cat_at.size(); ++c)
      for (const auto &lv : levels[c]) {
        e.x(f) = rows[r][cat_at[c]] == lv ? 1.0 : 0.0;
        ++f;
      }
    e.y = rows[r][label_at] == schema.positive_label ? 1 : -1;
    ds.examples.push_back(std::move(e));
    for (const auto &[gname, g] : schema.groups)
      ds.groups[gname].push_back(rows[r][col_index[g.first]] == g.second ? 1
                                                                         : 0);
  }
  auto [normalized, scale] = normalize_dataset(ds);
  (void)scale;
  out.data = std::move(normalized);
  return out;
}

// Drops every feature derived from the given source columns (applied after
// corruption; group flags are retained for evaluation).
inline IngestResult censor_columns(const IngestResult &src, const LabeledDataset &data,
                                   const std::vector<std::string> &source_cols) {
  std::vector<Eigen::Index> keep;
  IngestResult out;
  for (std::size_t f = 0; f < src.feature_source.size(); ++f) {
    const bool drop =
        std::find(source_cols.begin(), source_cols.end(),
                  src.feature_source[f]) != source_cols.end();
    if (drop) continue;
    keep.push_back(static_cast<Eigen::Index>(f));
    out.feature_names.push_back(src.feature_names[f]);
    out.feature_source.push_back(src.feature_source[f]);
  }
  LabeledDataset ds;
  ds.dimension = static_cast<Eigen::Index>(keep.size());
  ds.scale = data.scale;
  ds.groups = data.groups;
  ds.examples.reserve(data.size());
  for (const auto &e : data.examples) {
    LabeledExample ne;
    ne.x = Vec(ds.dimension);
    for (Eigen::Index j = 0; j < ds.dimension; ++j) ne.x(j) = e.x(keep[static_cast<std::size_t>(j)]);
    ne.y = e.y;
    ne.clean_y = e.clean_y;
    ne.flipped = e.flipped;
    ds.examples.push_back(std::move(ne));
  }
  out.data = std::move(ds);
  return out;
}

// ---------------------------------------------------------------------------
// noise configuration (serializable rules)

struct NoiseConfig {
  enum class Model { massart, rcn, non_oblivious };
  Model model = Model::rcn;
  double eta = -1.0;  // negative means "use the sweep value"
  struct Rule {
    std::string kind;  // coord_gt / coord_ge / coord_lt / coord_le / group
    int coord = 0;
    double value = 0.0;
    bool raw_units = false;  // thresholds stated before ball normalization
    std::string group_name;
    double rate = -1.0;  // negative means "use the sweep value"
  };
  std::vector<Rule> rules;
  double default_rate = 0.0;
  bool default_is_eta = false;
  std::string strategy = "worst_case_sign_flip";

  static NoiseConfig from_json(const json &j) {
    NoiseConfig n;
    const std::string model = j.at("model").get<std::string>();
    if (model == "massart")
      n.model = Model::massart;
    else if (model == "rcn")
      n.model = Model::rcn;
    else if (model == "non_oblivious")
      n.model = Model::non_oblivious;
    else
      throw std::invalid_argument("noise: unknown model " + model);
    if (j.contains("eta") && j.at("eta").is_number())
      n.eta = j.at("eta").get<double>();
    if (j.contains("default_rate")) {
      if (j.at("default_rate").is_string())
        n.default_is_eta = true;
      else
        n.default_rate = j.at("default_rate").get<double>();
    }
    n.strategy = j.value("strategy", std::string("worst_case_sign_flip"));
    for (const auto &r : j.value("rules", json::array())) {
      Rule rule;
      rule.kind = r.at("kind").get<std::string>();
      rule.coord = r.value("coord", 0);
      rule.value = r.value("value", 0.0);
      rule.raw_units = r.value("raw_units", false);
      rule.group_name = r.value("group", std::string());
      if (r.at("rate").is_string())
        rule.rate = -1.0;
      else
        rule.rate = r.at("rate").get<double>();
      n.rules.push_back(std::move(rule));
    }
    return n;
  }
};

inline Predicate rule_predicate(const NoiseConfig::Rule &r, double scale) {
  const double v = r.raw_units ? r.value / scale : r.value;
  if (r.kind == "coord_gt")
    return Predicate::on_coord(Predicate::Kind::coord_gt, r.coord, v);
  if (r.kind == "coord_ge")
    return Predicate::on_coord(Predicate::Kind::coord_ge, r.coord, v);
  if (r.kind == "coord_lt")
    return Predicate::on_coord(Predicate::Kind::coord_lt, r.coord, v);
  if (r.kind == "coord_le")
    return Predicate::on_coord(Predicate::Kind::coord_le, r.coord, v);
  if (r.kind == "group") return Predicate::group(r.group_name);
  throw std::invalid_argument("noise: unknown rule kind " + r.kind);
}

// Applies the configured adversary. eta_value fills any "sweep" slots; w_star
// may be null unless a custom non-oblivious strategy needs it.
inline LabeledDataset apply_noise(const NoiseConfig &cfg,
                                  const LabeledDataset &clean,
                                  const Halfspace *w_star, double eta_value,
                                  std::uint64_t seed) {
  const double eta = cfg.eta >= 0.0 ? cfg.eta : eta_value;
  switch (cfg.model) {
    case NoiseConfig::Model::rcn:
      return apply_rcn(clean, eta, seed);
    case NoiseConfig::Model::massart: {
      MassartSpec spec;
      spec.default_rate = cfg.default_is_eta ? eta : cfg.default_rate;
      spec.eta_cap = spec.default_rate;
      for (const auto &r : cfg.rules) {
        const double rate = r.rate >= 0.0 ? r.rate : eta;
        spec.eta_cap = std::max(spec.eta_cap, rate);
        spec.rules.push_back({rule_predicate(r, clean.scale), rate});
      }
      return apply_massart(clean, spec, seed);
    }
    case NoiseConfig::Model::non_oblivious: {
      NonObliviousSpec spec;
      spec.eta = eta;
      if (cfg.strategy == "worst_case_sign_flip")
        spec.strategy = NonObliviousSpec::Strategy::worst_case_sign_flip;
      else if (cfg.strategy == "targeted_predicate") {
        spec.strategy = NonObliviousSpec::Strategy::targeted_predicate;
        if (cfg.rules.empty())
          throw std::invalid_argument(
              "noise: targeted strategy needs one rule predicate");
        spec.target = rule_predicate(cfg.rules.front(), clean.scale);
      } else {
        throw std::invalid_argument("noise: unknown strategy " + cfg.strategy);
      }
      Halfspace dummy(Vec::Zero(clean.dimension));
      return apply_non_oblivious(clean, w_star ? *w_star : dummy, spec, seed);
    }
  }
  throw std::logic_error("noise: unreachable");
}

// ---------------------------------------------------------------------------
// model files

inline void save_halfspace(const Halfspace &h, const std::string &path,
                           const json &meta = json::object()) {
  json j;
  j["version"] = 1;
  j["kind"] = "halfspace";
  j["dimension"] = h.w.size();
  j["weights"] = std::vector<double>(h.w.data(), h.w.data() + h.w.size());
  j["bias"] = h.bias;
  if (!meta.empty()) j["meta"] = meta;
  write_file(path, j.dump(2) + "\n");
}

inline Halfspace load_halfspace(const json &j) {
  if (j.value("version", 0) != 1 || j.value("kind", "") != "halfspace")
    throw std::runtime_error("model: not a version-1 halfspace file");
  const auto weights = j.at("weights").get<std::vector<double>>();
  Vec w(static_cast<Eigen::Index>(weights.size()));
  for (std::size_t i = 0; i < weights.size(); ++i)
    w(static_cast<Eigen::Index>(i)) = weights[i];
  return Halfspace(std::move(w), j.value("bias", 0.0));
}

inline void save_region_classifier(const PiecewiseRegionClassifier &h,
                                   Eigen::Index dimension,
                                   const std::string &path,
                                   const json &meta = json::object()) {
  json j;
  j["version"] = 1;
  j["kind"] = "region_circuit";
  j["dimension"] = dimension;
  json gates = json::array();
  for (const auto &g : h.circuit.gates) {
    json gg;
    switch (g.op) {
      case Gate::Op::threshold:
        gg["op"] = "threshold";
        gg["w"] = std::vector<double>(g.w.data(), g.w.data() + g.w.size());
        gg["tau"] = g.tau;
        gg["sense"] = g.sense;
        break;
      case Gate::Op::g_and:
        gg["op"] = "and";
        gg["a"] = g.a;
        gg["b"] = g.b;
        break;
      case Gate::Op::g_or:
        gg["op"] = "or";
        gg["a"] = g.a;
        gg["b"] = g.b;
        break;
      case Gate::Op::g_not:
        gg["op"] = "not";
        gg["a"] = g.a;
        break;
    }
    gates.push_back(std::move(gg));
  }
  j["gates"] = std::move(gates);
  json regions = json::array();
  for (const auto &[id, gate] : h.circuit.region_outputs) {
    json rr;
    rr["id"] = id;
    rr["gate"] = gate;
    rr["label"] = h.labels.at(id);
    rr["live"] = h.live.at(id);
    regions.push_back(std::move(rr));
  }
  j["regions"] = std::move(regions);
  if (!meta.empty()) j["meta"] = meta;
  write_file(path, j.dump(2) + "\n");
}

inline PiecewiseRegionClassifier load_region_classifier(const json &j) {
  if (j.value("version", 0) != 1 || j.value("kind", "") != "region_circuit")
    throw std::runtime_error("model: not a version-1 region circuit file");
  PiecewiseRegionClassifier h;
  for (const auto &gg : j.at("gates")) {
    Gate g;
    const std::string op = gg.at("op").get<std::string>();
    if (op == "threshold") {
      g.op = Gate::Op::threshold;
      const auto w = gg.at("w").get<std::vector<double>>();
      g.w = Vec(static_cast<Eigen::Index>(w.size()));
      for (std::size_t i = 0; i < w.size(); ++i)
        g.w(static_cast<Eigen::Index>(i)) = w[i];
      g.tau = gg.at("tau").get<double>();
      g.sense = gg.at("sense").get<int>();
    } else if (op == "and") {
      g.op = Gate::Op::g_and;
      g.a = gg.at("a").get<int>();
      g.b = gg.at("b").get<int>();
    } else if (op == "or") {
      g.op = Gate::Op::g_or;
      g.a = gg.at("a").get<int>();
      g.b = gg.at("b").get<int>();
    } else if (op == "not") {
      g.op = Gate::Op::g_not;
      g.a = gg.at("a").get<int>();
    } else {
      throw std::runtime_error("model: unknown gate op " + op);
    }
    h.circuit.gates.push_back(std::move(g));
  }
  for (const auto &rr : j.at("regions")) {
    const int id = rr.at("id").get<int>();
    h.circuit.region_outputs[id] = rr.at("gate").get<int>();
    h.labels[id] = rr.at("label").get<int>();
    h.live[id] = rr.at("live").get<bool>();
    h.next_region_id = std::max(h.next_region_id, id + 1);
  }
  return h;
}

struct LoadedModel {
  Classifier fn;
  std::string kind;
  Eigen::Index dimension = 0;
};

inline LoadedModel load_model(const std::string &path) {
  json j = load_json(path);
  LoadedModel m;
  m.kind = j.value("kind", "");
  m.dimension = j.value("dimension", 0);
  if (m.kind == "halfspace") {
    auto h = load_halfspace(j);
    m.fn = as_classifier(h);
  } else if (m.kind == "region_circuit") {
    auto h = load_region_classifier(j);
    m.fn = [h](const Vec &x) { return h.predict(x); };
  } else {
    throw std::runtime_error("model: unknown kind in " + path);
  }
  return m;
}

// ---------------------------------------------------------------------------
// evaluation

inline Metrics evaluate_model(const Classifier &h, const LabeledDataset &data) {
  Metrics m;
  m.zero_one_error = zero_one_error(h, data);
  for (const auto &[name, flags] : data.groups) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < flags.size(); ++i)
      if (flags[i]) idx.push_back(i);
    if (!idx.empty())
      m.per_group_error[name] =
          zero_one_error(h, data, Filter::from_indices(idx));
  }
  bool have_flags = !data.empty();
  for (const auto &e : data.examples)
    if (!e.flipped) {
      have_flags = false;
      break;
    }
  if (have_flags) {
    double flipped = 0.0;
    for (const auto &e : data.examples) flipped += *e.flipped ? 1.0 : 0.0;
    m.opt_reference = flipped / static_cast<double>(data.size());
  }
  return m;
}

inline json metrics_to_json(const Metrics &m, const LabeledDataset &data,
                            const Classifier *h = nullptr) {
  json j;
  j["noisy_zero_one_error"] = m.zero_one_error;
  if (m.opt_reference) j["opt_reference"] = *m.opt_reference;
  if (!m.per_group_error.empty()) {
    json g;
    for (const auto &[name, err] : m.per_group_error) g[name] = err;
    j["per_group_error"] = std::move(g);
  }
  // clean metrics exist only when the generator metadata was recorded
  bool have_clean = h != nullptr && !data.empty();
  if (have_clean)
    for (const auto &e : data.examples)
      if (!e.clean_y) {
        have_clean = false;
        break;
      }
  if (have_clean) {
    double wrong = 0.0;
    for (const auto &e : data.examples)
      wrong += (*h)(e.x) != *e.clean_y ? 1.0 : 0.0;
    j["clean_zero_one_error"] = wrong / static_cast<double>(data.size());
  }
  j["n"] = data.size();
  return j;
}

// ---------------------------------------------------------------------------
// experiment sweep

struct SweepCell {
  std::string learner;
  std::size_t eta_index = 0;
  double eta = 0.0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double test_error = std::numeric_limits<double>::quiet_NaN();
  double group_error = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;
  std::string error;  // per-cell failure diagnostic; empty on success
};

namespace detail {

inline Halfspace train_sweep_learner(const std::string &learner,
                                     const json &cfg,
                                     const LabeledDataset &train, double eta,
                                     std::uint64_t seed) {
  if (learner == "logreg") {
    BaselineConfig bc;
    bc.iters = cfg.value("logreg_iters", 200);
    bc.step = cfg.value("logreg_step", 4.0);
    // the configured penalty is stated at raw feature scale; training runs
    // on ball-normalized rows, so rescale it by the recorded norm divisor
    bc.l2_strength =
        cfg.value("logreg_l2", 0.02) / (train.scale * train.scale);
    return logistic_regression(train, bc);
  }
  if (learner == "leakyrelu_gd") {
    BaselineConfig bc;
    bc.iters = cfg.value("iterations", 2000);
    // steps, like penalties, are stated at raw feature scale
    bc.step = cfg.value("step", 0.05) * train.scale;
    return leakyrelu_gd_plain(train, eta, bc);
  }
  LearnerConfig lc;
  lc.epsilon = cfg.value("epsilon", 0.05);
  lc.eta = eta;
  lc.T = cfg.value("iterations", 2000);
  lc.gamma = cfg.value("gamma", 0.1);
  lc.seed = seed;
  const std::string rule = cfg.value("step_rule", std::string("constant"));
  lc.step_rule = rule == "inv_sqrt_t" ? GDConfig::StepRule::inv_sqrt_t
                 : rule == "regret_scaled"
                     ? GDConfig::StepRule::regret_scaled
                     : GDConfig::StepRule::constant;
  lc.step = cfg.value("step", 0.05) * train.scale;
  // hold out part of the training set for the stopping rule; the sweep's
  // test set stays untouched until final evaluation
  auto [fit, holdout] =
      train_test_split(train, cfg.value("holdout_fraction", 0.2), seed + 1);
  lc.batch_size = fit.size();
  ReuseSource source(fit);
  if (learner == "filtertron_cutting") {
    lc.batch_size = std::min<std::size_t>(fit.size(), 1000);
    auto report = filtertron_cutting(source, holdout, lc);
    return report.final;
  }
  // the reference experiment protocol runs every iteration and keeps the
  // best held-out iterate rather than stopping at the first passing test
  if (cfg.value("run_full", true)) {
    const double lambda = lc.lambda_or_default();
    const std::size_t T = lc.T;
    auto oracle = [&](const LabeledDataset &batch, const Halfspace &w,
                      std::size_t) {
      auto dir = find_descent_direction(
          batch, w, lc.epsilon / 6.0,
          lc.delta / (2.0 * static_cast<double>(std::max<std::size_t>(T, 1))),
          lambda);
      return dir.g;
    };
    auto report =
        filtertron_loop(source, holdout, lc, oracle, /*stop_threshold=*/-1.0);
    return report.final;
  }
  auto report = filtertron(source, holdout, lc);
  return report.final;
}

}  // namespace detail

// One sweep cell: generate or corrupt, split, train, evaluate.
inline SweepCell run_sweep_cell(const json &config, const std::string &learner,
                                std::size_t eta_index, double eta,
                                std::size_t trial, std::uint64_t master_seed,
                                const IngestResult *csv_base) {
  SweepCell cell;
  cell.learner = learner;
  cell.eta_index = eta_index;
  cell.eta = eta;
  cell.trial = trial;
  cell.seed = derive_seed(master_seed, eta_index * 1000003 + trial);

  const json &inst = config.at("instance");
  LabeledDataset clean;
  std::optional<Halfspace> w_star;
  if (csv_base) {
    clean = csv_base->data;
  } else {
    const std::string kind = inst.at("kind").get<std::string>();
    const auto n = inst.value("n", 1250);
    if (kind == "mixture") {
      clean = gen_synthetic_mixture(static_cast<std::size_t>(n), cell.seed);
    } else if (kind == "margin_halfspace") {
      auto s = gen_margin_halfspace(inst.value("d", 10),
                                    inst.value("gamma", 0.1),
                                    static_cast<std::size_t>(n), cell.seed);
      clean = std::move(s.data);
      w_star = std::move(s.w_star);
    } else if (kind == "integer_grid") {
      auto s = gen_integer_grid(inst.value("d", 4), inst.value("coord_range", 10),
                                inst.value("wstar_bits", 8),
                                static_cast<std::size_t>(n), cell.seed);
      clean = std::move(s.data);
      w_star = std::move(s.w_star);
    } else if (kind == "conjunction") {
      auto s = gen_conjunction(inst.value("d", 100), inst.value("k", 3),
                               static_cast<std::size_t>(n), cell.seed);
      clean = std::move(s.data);
      w_star = std::move(s.w_star);
    } else {
      throw std::invalid_argument("sweep: unknown instance kind " + kind);
    }
  }

  auto noise = NoiseConfig::from_json(config.at("noise"));
  auto noisy = apply_noise(noise, clean, w_star ? &*w_star : nullptr, eta,
                           derive_seed(cell.seed, 1));
  auto [train, test] = train_test_split(
      noisy, config.value("test_fraction", 0.2), derive_seed(cell.seed, 2));

  const auto t0 = std::chrono::steady_clock::now();
  try {
    auto model = detail::train_sweep_learner(
        learner,
        config.value(learner, config.value("learner_defaults", json::object())),
        train, eta, derive_seed(cell.seed, 3));
    cell.test_error = zero_one_error(model, test);
    if (config.contains("target_group")) {
      const auto group = config.at("target_group").get<std::string>();
      auto it = test.groups.find(group);
      if (it != test.groups.end()) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < it->second.size(); ++i)
          if (it->second[i]) idx.push_back(i);
        if (!idx.empty())
          cell.group_error =
              zero_one_error(model, test, Filter::from_indices(idx));
      }
    }
  } catch (const std::exception &e) {
    cell.error = e.what();
  }
  cell.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return cell;
}

// Full grid of (learner, eta, trial) cells in a bounded worker pool; results
// are written in sorted order so output bytes do not depend on scheduling.
inline void run_sweep(const json &config, const std::string &out_prefix,
                      std::size_t threads = 0) {
  const auto learners = config.at("learners").get<std::vector<std::string>>();
  const auto eta_grid = config.at("eta_grid").get<std::vector<double>>();
  const auto trials = config.value("trials", 1);
  const auto master_seed = config.value("seed", 0ULL);
  const std::uint64_t config_hash = fnv1a(config.dump());

  std::optional<IngestResult> csv_base;
  const json &inst = config.at("instance");
  if (inst.at("kind").get<std::string>() == "csv") {
    auto schema = CsvSchema::from_json(load_json(inst.at("schema").get<std::string>()));
    csv_base = ingest_csv(inst.at("path").get<std::string>(), schema);
    if (config.contains("censor_group")) {
      const auto g = config.at("censor_group").get<std::string>();
      auto it = schema.censor.find(g);
      if (it == schema.censor.end())
        throw std::invalid_argument("sweep: no censor list for group " + g);
      // censoring is applied after corruption inside the cell; here the base
      // features are reduced up front because corruption never reads them
      csv_base = censor_columns(*csv_base, csv_base->data, it->second);
    }
  }

  struct Job {
    std::string learner;
    std::size_t eta_index, trial;
  };
  std::vector<Job> jobs;
  for (const auto &l : learners)
    for (std::size_t e = 0; e < eta_grid.size(); ++e)
      for (int t = 0; t < trials; ++t)
        jobs.push_back({l, e, static_cast<std::size_t>(t)});

  std::vector<SweepCell> cells(jobs.size());
  if (threads == 0)
    threads = std::min<std::size_t>(std::thread::hardware_concurrency(), 8);
  threads = std::max<std::size_t>(threads, 1);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const auto &j = jobs[i];
      cells[i] = run_sweep_cell(config, j.learner, j.eta_index,
                                eta_grid[j.eta_index], j.trial, master_seed,
                                csv_base ? &*csv_base : nullptr);
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto &t : pool) t.join();

  std::sort(cells.begin(), cells.end(), [](const SweepCell &a, const SweepCell &b) {
    return std::tie(a.learner, a.eta_index, a.trial) <
           std::tie(b.learner, b.eta_index, b.trial);
  });

  const std::string stamp = "config_hash=" + std::to_string(config_hash) +
                            " seed=" + std::to_string(master_seed);
  {
    std::ostringstream out;
    out << "# massart-results v1 " << stamp << "\n";
    out << "learner,eta,trial,cell_seed,test_error,group_error,error\n";
    for (const auto &c : cells) {
      out << c.learner << "," << format_double(c.eta) << "," << c.trial << ","
          << c.seed << ",";
      if (!std::isnan(c.test_error)) out << format_double(c.test_error);
      out << ",";
      if (!std::isnan(c.group_error)) out << format_double(c.group_error);
      out << ",";
      for (char ch : c.error) out << (ch == ',' || ch == '\n' ? ';' : ch);
      out << "\n";
    }
    write_file(out_prefix + "_results.csv", out.str());
  }
  {
    // wall-clock timings are inherently run-dependent, so they live in a
    // sidecar excluded from the byte-identical reproducibility guarantee
    std::ostringstream out;
    out << "# massart-timing v1 " << stamp << "\n";
    out << "learner,eta,trial,seconds\n";
    for (const auto &c : cells)
      out << c.learner << "," << format_double(c.eta) << "," << c.trial << ","
          << format_double(c.seconds) << "\n";
    write_file(out_prefix + "_timing.csv", out.str());
  }
  for (const auto &l : learners) {
    std::ostringstream out;
    out << "# massart-curve v1 learner=" << l << " " << stamp << "\n";
    out << "eta,median_error,std_error,trials\n";
    for (std::size_t e = 0; e < eta_grid.size(); ++e) {
      std::vector<double> errs;
      for (const auto &c : cells)
        if (c.learner == l && c.eta_index == e && !std::isnan(c.test_error))
          errs.push_back(c.test_error);
      if (errs.empty()) continue;
      std::sort(errs.begin(), errs.end());
      const double median = errs.size() % 2
                                ? errs[errs.size() / 2]
                                : 0.5 * (errs[errs.size() / 2 - 1] +
                                         errs[errs.size() / 2]);
      double mean = 0.0;
      for (double v : errs) mean += v;
      mean /= static_cast<double>(errs.size());
      double var = 0.0;
      for (double v : errs) var += (v - mean) * (v - mean);
      var /= static_cast<double>(errs.size());
      out << format_double(eta_grid[e]) << "," << format_double(median) << ","
          << format_double(std::sqrt(var)) << "," << errs.size() << "\n";
    }
    write_file(out_prefix + "_curve_" + l + ".csv", out.str());
  }
  {
    json meta;
    meta["version"] = 1;
    meta["config_hash"] = config_hash;
    meta["seed"] = master_seed;
    meta["config"] = config;
    meta["preprocessing"] = {
        {"normalization", "rows scaled into the unit ball; scale recorded"},
        {"numeric_columns", "min-max scaled to [0,1] per column"},
        {"categorical_columns", "one-hot encoded, first-appearance order"},
        {"corruption", "train and test labels both corrupted"}};
    write_file(out_prefix + "_meta.json", meta.dump(2) + "\n");
  }
}

}  // namespace massart::harness
