// Command-line front end: dataset generation, corruption, training,
// evaluation, distillation, experiment sweeps, region-classifier learning,
// and the correlational-query reduction demo.

#include <cstdio>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "massart/harness.hpp"

namespace mh = massart::harness;
using massart::Classifier;
using massart::Halfspace;
using massart::LabeledDataset;
using massart::Vec;
using nlohmann::json;

namespace {

int g_log_level = 1;  // 0 quiet, 1 info, 2 debug

void log_info(const std::string &msg) {
  if (g_log_level >= 1) std::cerr << "[info] " << msg << "\n";
}

json meta_stamp(const json &config, std::uint64_t seed) {
  json m;
  m["config_hash"] = mh::fnv1a(config.dump());
  m["seed"] = seed;
  return m;
}

LabeledDataset load_any_dataset(const std::string &data_path,
                                const std::string &schema_path) {
  if (schema_path.empty()) return mh::read_dataset_csv(data_path);
  auto schema = mh::CsvSchema::from_json(mh::load_json(schema_path));
  return mh::ingest_csv(data_path, schema).data;
}

int cmd_generate(const std::string &config_path, std::uint64_t seed,
                 const std::string &out) {
  json cfg = mh::load_json(config_path);
  const std::string kind = cfg.at("kind").get<std::string>();
  const auto n = static_cast<std::size_t>(cfg.value("n", 1000));
  LabeledDataset data;
  std::optional<Halfspace> w_star;
  if (kind == "mixture") {
    data = mh::gen_synthetic_mixture(n, seed);
  } else if (kind == "margin_halfspace") {
    auto s = mh::gen_margin_halfspace(cfg.value("d", 10), cfg.value("gamma", 0.1),
                                      n, seed);
    data = std::move(s.data);
    w_star = s.w_star;
  } else if (kind == "integer_grid") {
    auto s = mh::gen_integer_grid(cfg.value("d", 4), cfg.value("coord_range", 10),
                                  cfg.value("wstar_bits", 8), n, seed);
    data = std::move(s.data);
    w_star = s.w_star;
  } else if (kind == "conjunction") {
    auto s = mh::gen_conjunction(cfg.value("d", 100), cfg.value("k", 3), n, seed);
    data = std::move(s.data);
    w_star = s.w_star;
  } else {
    throw std::invalid_argument("generate: unknown instance kind " + kind);
  }
  mh::write_dataset_csv(data, out,
                        "seed=" + std::to_string(seed) + " config_hash=" +
                            std::to_string(mh::fnv1a(cfg.dump())));
  if (w_star && cfg.contains("wstar_out"))
    mh::save_halfspace(*w_star, cfg.at("wstar_out").get<std::string>(),
                       meta_stamp(cfg, seed));
  log_info("wrote " + std::to_string(data.size()) + " examples to " + out);
  return 0;
}

int cmd_corrupt(const std::string &config_path, const std::string &data_path,
                std::uint64_t seed, const std::string &out) {
  json cfg = mh::load_json(config_path);
  auto clean = mh::read_dataset_csv(data_path);
  auto noise = mh::NoiseConfig::from_json(cfg);
  std::optional<Halfspace> w_star;
  if (cfg.contains("wstar_model"))
    w_star = mh::load_halfspace(mh::load_json(cfg.at("wstar_model").get<std::string>()));
  auto noisy = mh::apply_noise(noise, clean, w_star ? &*w_star : nullptr,
                               cfg.value("eta", 0.0), seed);
  mh::write_dataset_csv(noisy, out,
                        "seed=" + std::to_string(seed) + " config_hash=" +
                            std::to_string(mh::fnv1a(cfg.dump())));
  log_info("corrupted labels written to " + out);
  return 0;
}

int cmd_train(const std::string &learner, const std::string &config_path,
              const std::string &data_path, const std::string &test_path,
              std::uint64_t seed, const std::string &out,
              const std::string &report_path) {
  json cfg = config_path.empty() ? json::object() : mh::load_json(config_path);
  auto data = mh::read_dataset_csv(data_path);

  if (learner == "logreg") {
    massart::BaselineConfig bc;
    bc.iters = cfg.value("iterations", 200);
    bc.step = cfg.value("step", 1.0);
    bc.l2_strength = cfg.value("l2_strength", 0.02);
    auto h = massart::logistic_regression(data, bc);
    mh::save_halfspace(h, out, meta_stamp(cfg, seed));
    return 0;
  }
  if (learner == "leakyrelu_gd") {
    massart::BaselineConfig bc;
    bc.iters = cfg.value("iterations", 2000);
    bc.step = cfg.value("step", 0.05);
    auto h = massart::leakyrelu_gd_plain(data, cfg.value("eta", 0.0), bc);
    mh::save_halfspace(h, out, meta_stamp(cfg, seed));
    return 0;
  }

  massart::LearnerConfig lc;
  lc.epsilon = cfg.value("epsilon", 0.05);
  lc.eta = cfg.value("eta", 0.0);
  lc.delta = cfg.value("delta", 0.05);
  lc.T = cfg.value("iterations", 0);
  lc.gamma = cfg.value("gamma", 0.1);
  lc.seed = seed;
  const std::string rule = cfg.value("step_rule", std::string("inv_sqrt_t"));
  lc.step_rule = rule == "constant" ? massart::GDConfig::StepRule::constant
                 : rule == "regret_scaled"
                     ? massart::GDConfig::StepRule::regret_scaled
                     : massart::GDConfig::StepRule::inv_sqrt_t;
  lc.step = cfg.value("step", 0.05);

  massart::LearnerReport report;
  if (learner == "general") {
    report = massart::learn_general_halfspace(data, lc,
                                              cfg.value("bit_scale", 8.0));
  } else {
    LabeledDataset test;
    LabeledDataset train;
    if (!test_path.empty()) {
      test = mh::read_dataset_csv(test_path);
      train = data;
    } else {
      auto split = massart::train_test_split(
          data, cfg.value("test_fraction", 0.2), massart::derive_seed(seed, 1));
      train = std::move(split.first);
      test = std::move(split.second);
    }
    lc.batch_size = cfg.value("batch", 0);
    const std::string source_kind = cfg.value("source", std::string("reuse"));
    std::unique_ptr<massart::BatchSource> source;
    if (source_kind == "partition")
      source = std::make_unique<massart::PartitionSource>(train);
    else
      source = std::make_unique<massart::ReuseSource>(train);
    if (lc.batch_size == 0) lc.batch_size = train.size();

    if (learner == "filtertron")
      report = massart::filtertron(*source, test, lc);
    else if (learner == "filtertron_mirror")
      report = massart::filtertron_mirror(*source, test, lc);
    else if (learner == "filtertron_cutting")
      report = massart::filtertron_cutting(*source, test, lc);
    else
      throw std::invalid_argument("train: unknown learner " + learner);
  }

  mh::save_halfspace(report.final, out, meta_stamp(cfg, seed));
  if (!report_path.empty()) {
    json r;
    r["version"] = 1;
    r["iterations_used"] = report.iterations_used;
    r["oracle_calls"] = report.oracle_calls;
    r["stop_reason"] = massart::to_string(report.stop_reason);
    r["test_error_trace"] = report.test_error_trace;
    mh::write_file(report_path, r.dump(2) + "\n");
  }
  log_info("model written to " + out);
  return 0;
}

int cmd_evaluate(const std::string &model_path, const std::string &data_path,
                 const std::string &schema_path, const std::string &out) {
  auto model = mh::load_model(model_path);
  auto data = load_any_dataset(data_path, schema_path);
  auto metrics = mh::evaluate_model(model.fn, data);
  json j = mh::metrics_to_json(metrics, data, &model.fn);
  j["model_kind"] = model.kind;
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  if (!out.empty()) mh::write_file(out, text);
  return 0;
}

int cmd_distill(const std::string &teacher_path, const std::string &config_path,
                const std::string &data_path, const std::string &mode_name,
                std::uint64_t seed, const std::string &out) {
  json cfg = config_path.empty() ? json::object() : mh::load_json(config_path);
  auto teacher = mh::load_model(teacher_path);
  auto data = mh::read_dataset_csv(data_path);
  auto split = massart::train_test_split(data, cfg.value("test_fraction", 0.2),
                                         massart::derive_seed(seed, 1));
  massart::LearnerConfig lc;
  lc.epsilon = cfg.value("epsilon", 0.05);
  lc.eta = cfg.value("eta", 0.0);
  lc.delta = cfg.value("delta", 0.05);
  lc.T = cfg.value("iterations", 0);
  lc.gamma = cfg.value("gamma", 0.1);
  lc.seed = seed;
  lc.batch_size = cfg.value("batch", split.first.size());
  massart::DistillMode mode = massart::DistillMode::gd;
  if (mode_name == "cutting") mode = massart::DistillMode::cutting;
  if (mode_name == "ellipsoid_general")
    mode = massart::DistillMode::ellipsoid_general;
  massart::ReuseSource source(split.first);
  auto report = massart::distill(teacher.fn, source, split.second, lc, mode);
  mh::save_halfspace(report.final, out, meta_stamp(cfg, seed));
  log_info("distilled halfspace written to " + out);
  return 0;
}

int cmd_sweep(const std::string &config_path, const std::string &out_prefix,
              std::uint64_t seed, bool seed_given, std::size_t threads) {
  json cfg = mh::load_json(config_path);
  if (seed_given) cfg["seed"] = seed;
  mh::run_sweep(cfg, out_prefix, threads);
  log_info("sweep outputs written with prefix " + out_prefix);
  return 0;
}

int cmd_glm(const std::string &config_path, const std::string &data_path,
            std::uint64_t seed, const std::string &out) {
  json cfg = mh::load_json(config_path);
  massart::GLMConfig gc;
  gc.epsilon = cfg.value("epsilon", 0.05);
  gc.delta = cfg.value("delta", 0.05);
  gc.lipschitz_L = cfg.value("lipschitz_L", 1.0);
  gc.zeta = cfg.value("zeta", 0.0);
  gc.max_samples_per_call = cfg.value("max_samples_per_call", 30000);
  gc.sgd_iter_cap = cfg.value("sgd_iter_cap", 4000);
  gc.seed = seed;

  std::function<LabeledDataset(std::size_t, massart::Rng &)> sampler;
  Eigen::Index dimension = 0;
  if (!data_path.empty()) {
    auto data = mh::read_dataset_csv(data_path);
    dimension = data.dimension;
    sampler = [data](std::size_t n, massart::Rng &rng) {
      std::vector<std::size_t> idx(n);
      for (auto &i : idx)
        i = static_cast<std::size_t>(massart::uniform01(rng) *
                                     static_cast<double>(data.size()));
      return massart::dataset_subset(data, idx);
    };
  } else {
    const json inst = cfg.at("instance");
    const double gamma = inst.value("gamma", 0.1);
    const double eta = inst.value("eta", 0.2);
    const int d = inst.value("d", 3);
    dimension = d;
    gc.lipschitz_L = (1.0 - 2.0 * eta) / gamma;
    massart::MisspecGLMSpec spec;
    spec.link = massart::LinkFunction::ramp(gamma, eta);
    auto inst_seed = massart::derive_seed(seed, 77);
    massart::Rng wrng(inst_seed);
    Vec w_star(d);
    for (int i = 0; i < d; ++i) w_star(i) = massart::normal(wrng);
    w_star.normalize();
    sampler = [spec, w_star, gamma, d](std::size_t n, massart::Rng &rng) {
      auto xs = [&](massart::Rng &r) {
        while (true) {
          Vec v(d);
          for (int i = 0; i < d; ++i) v(i) = massart::normal(r);
          v.normalize();
          v *= std::pow(massart::uniform01(r), 1.0 / d);
          if (std::abs(w_star.dot(v)) >= gamma) return v;
        }
      };
      return massart::sample_misspec_glm(xs, Halfspace(w_star), spec, n,
                                         rng());
    };
  }
  auto h = massart::learn_misspec_glm(sampler, gc);
  mh::save_region_classifier(h, dimension, out, meta_stamp(cfg, seed));
  log_info("region classifier written to " + out);
  return 0;
}

int cmd_csq_demo(const std::string &config_path, std::uint64_t seed,
                 const std::string &out) {
  json cfg = config_path.empty() ? json::object() : mh::load_json(config_path);
  const int dims = cfg.value("dims", 6);
  const int k = cfg.value("k", 2);
  const double eta_bound = cfg.value("eta", 0.25);
  const double epsilon = cfg.value("epsilon", 0.1);

  massart::FiniteDistribution dist;
  const int n = 1 << dims;
  for (int m = 0; m < n; ++m) {
    Vec x(dims);
    bool on = true;
    for (int j = 0; j < dims; ++j) {
      x(j) = (m >> j) & 1 ? 1.0 : 0.0;
      if (j < k && x(j) < 0.5) on = false;
    }
    dist.points.push_back(x);
    dist.probs.push_back(1.0 / n);
    dist.concept_labels.push_back(on ? 1 : -1);
  }
  massart::Rng rng(seed);
  std::vector<double> eta(dist.points.size());
  for (auto &e : eta) e = eta_bound * massart::uniform01(rng);

  massart::CsqLearner learner;
  std::vector<std::vector<int>> subsets;
  subsets.push_back({});
  for (int i = 0; i < dims; ++i) subsets.push_back({i});
  for (int i = 0; i < dims; ++i)
    for (int j = i + 1; j < dims; ++j) subsets.push_back({i, j});
  learner.num_queries = subsets.size();
  learner.tolerance = cfg.value("tolerance", 0.1);
  learner.run = [subsets](const std::function<double(
                              const std::function<double(const Vec &)> &)> &ask) {
    double best = -2.0;
    std::vector<int> best_set;
    for (const auto &s : subsets) {
      auto h = [s](const Vec &x) {
        for (int i : s)
          if (x(i) < 0.5) return -1.0;
        return 1.0;
      };
      const double corr = ask(h);
      if (corr > best) {
        best = corr;
        best_set = s;
      }
    }
    return Classifier([best_set](const Vec &x) {
      for (int i : best_set)
        if (x(i) < 0.5) return -1;
      return 1;
    });
  };

  auto result = massart::massart_learn_from_csqs(dist, eta, eta_bound, learner,
                                                 epsilon, 0.05);
  json j;
  j["version"] = 1;
  j["success"] = result.success;
  j["opt"] = result.opt;
  j["error"] = result.error;
  j["chosen_Z"] = result.chosen_Z;
  j["bound"] = result.opt + 2.0 * epsilon;
  j["meta"] = meta_stamp(cfg, seed);
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  if (!out.empty()) mh::write_file(out, text);
  return result.success ? 0 : 2;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Halfspace and GLM learning under bounded label noise"};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 0;
  std::string out, config, data_path, schema, model, teacher, test_path,
      report_path;
  std::string learner = "filtertron", mode = "gd";
  std::size_t threads = 0;
  app.add_option("--seed", seed, "master random seed")->capture_default_str();
  app.add_option("--log-level", g_log_level, "0=quiet 1=info 2=debug")
      ->capture_default_str();

  auto *gen = app.add_subcommand("generate", "generate a synthetic dataset");
  gen->add_option("--config", config, "instance config JSON")->required();
  gen->add_option("--out", out, "output dataset CSV")->required();

  auto *cor = app.add_subcommand("corrupt", "apply a label-noise adversary");
  cor->add_option("--config", config, "noise config JSON")->required();
  cor->add_option("--data", data_path, "input dataset CSV")->required();
  cor->add_option("--out", out, "output dataset CSV")->required();

  auto *tr = app.add_subcommand("train", "train a learner on a dataset");
  tr->add_option("--learner", learner,
                 "filtertron|filtertron_mirror|filtertron_cutting|general|"
                 "logreg|leakyrelu_gd")
      ->capture_default_str();
  tr->add_option("--config", config, "learner config JSON");
  tr->add_option("--data", data_path, "training dataset CSV")->required();
  tr->add_option("--test", test_path, "held-out dataset CSV");
  tr->add_option("--out", out, "output model JSON")->required();
  tr->add_option("--report", report_path, "optional run report JSON");

  auto *ev = app.add_subcommand("evaluate", "evaluate a model on a dataset");
  ev->add_option("--model", model, "model JSON")->required();
  ev->add_option("--data", data_path, "dataset CSV")->required();
  ev->add_option("--schema", schema, "schema JSON for external CSV");
  ev->add_option("--out", out, "optional metrics JSON output");

  auto *di = app.add_subcommand("distill", "distill a teacher into a halfspace");
  di->add_option("--teacher", teacher, "teacher model JSON")->required();
  di->add_option("--config", config, "distillation config JSON");
  di->add_option("--data", data_path, "dataset CSV")->required();
  di->add_option("--mode", mode, "gd|cutting|ellipsoid_general")
      ->capture_default_str();
  di->add_option("--out", out, "output model JSON")->required();

  auto *sw = app.add_subcommand("sweep", "run a noise-level experiment sweep");
  sw->add_option("--config", config, "sweep config JSON")->required();
  sw->add_option("--out", out, "output file prefix")->required();
  sw->add_option("--threads", threads, "worker threads (0 = auto)");

  auto *gl = app.add_subcommand("glm", "learn a piecewise region classifier");
  gl->add_option("--config", config, "glm config JSON")->required();
  gl->add_option("--data", data_path, "optional dataset CSV to resample");
  gl->add_option("--out", out, "output model JSON")->required();

  auto *cs = app.add_subcommand("csq-demo",
                                "correlational-query reduction demo");
  cs->add_option("--config", config, "demo config JSON");
  cs->add_option("--out", out, "optional result JSON output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // 0 for --help, 1 for usage errors
  }

  try {
    if (gen->parsed()) return cmd_generate(config, seed, out);
    if (cor->parsed()) return cmd_corrupt(config, data_path, seed, out);
    if (tr->parsed())
      return cmd_train(learner, config, data_path, test_path, seed, out,
                       report_path);
    if (ev->parsed()) return cmd_evaluate(model, data_path, schema, out);
    if (di->parsed())
      return cmd_distill(teacher, config, data_path, mode, seed, out);
    if (sw->parsed())
      return cmd_sweep(config, out, seed, app.count("--seed") > 0, threads);
    if (gl->parsed()) return cmd_glm(config, data_path, seed, out);
    if (cs->parsed()) return cmd_csq_demo(config, seed, out);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
