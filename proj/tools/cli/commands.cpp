#include "commands.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "asaukit/approximation.hpp"
#include "asaukit/datasets.hpp"
#include "asaukit/error.hpp"
#include "asaukit/metrics.hpp"
#include "asaukit/rng.hpp"
#include "asaukit/trainer.hpp"
#include "config.hpp"

namespace asaukit::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

fs::path prepare_out_dir(const ordered_json& config) {
  const fs::path dir = parse_out_dir(config);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir.string() + "'" + (ec ? ": " + ec.message() : ""));
  }
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

ordered_json manifest_header(const char* command, const ordered_json& config) {
  ordered_json m;
  m["tool"] = "asaukit";
  m["version"] = kToolVersion;
  m["command"] = command;
  m["seed"] = parse_seed(config);
  m["config"] = config;
  return m;
}

void write_json(const fs::path& path, const ordered_json& j) { write_text(path, j.dump(2) + "\n"); }

void write_timing(const fs::path& dir, double seconds) {
  ordered_json t;
  t["wall_clock_seconds"] = seconds;
  write_json(dir / "timing.json", t);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string file_token(const std::string& label) {
  std::string s = label;
  for (char& c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
    if (!ok) c = '_';
  }
  return s;
}

// ---------------------------------------------------------------- compare

struct CompareSeeds {
  std::uint64_t data;
  std::uint64_t split;
  std::uint64_t init;
  std::uint64_t train;
};

CompareSeeds derive_seeds(std::uint64_t master) {
  SplitMix64 rng(master);
  CompareSeeds s{};
  s.data = rng.next();
  s.split = rng.next();
  s.init = rng.next();
  s.train = rng.next();
  return s;
}

std::vector<LayerSpec> classifier_layers(const Shape& sample, std::size_t classes, std::size_t hidden,
                                         const ActivationSpec& act) {
  std::vector<LayerSpec> layers;
  if (sample.size() > 1) layers.emplace_back(FlattenSpec{});
  layers.emplace_back(DenseSpec{shape_volume(sample), hidden});
  layers.emplace_back(ActivationLayerSpec{act});
  layers.emplace_back(DenseSpec{hidden, classes});
  return layers;
}

std::vector<LayerSpec> segmenter_layers(std::size_t c1, std::size_t c2, const ActivationSpec& act) {
  return {Conv2dSpec{1, c1}, ActivationLayerSpec{act}, MaxPool2x2Spec{},
          Conv2dSpec{c1, c2}, ActivationLayerSpec{act}, MaxPool2x2Spec{},
          Conv2dSpec{c2, c2}, ActivationLayerSpec{act}, Upsample2xSpec{},
          Conv2dSpec{c2, c1}, ActivationLayerSpec{act}, Upsample2xSpec{},
          Conv2dSpec{c1, 1}};
}

struct RunOutcome {
  std::string status = "ok";
  TrainResult train;
  MetricReport metrics;
  std::string checkpoint;
  std::string history_csv;
  std::string confusion_csv;
};

std::vector<std::string> metric_keys(Task task) {
  if (task == Task::classification) {
    return {"precision_macro", "recall_macro", "f1_macro", "precision_micro", "recall_micro", "f1_micro", "accuracy", "mcc"};
  }
  return {"mdsc", "miou", "recall", "precision"};
}

std::string confusion_csv(const ConfusionMatrix& cm) {
  std::ostringstream out;
  out << "truth\\predicted";
  for (std::size_t j = 0; j < cm.k(); ++j) out << ',' << j;
  out << '\n';
  for (std::size_t i = 0; i < cm.k(); ++i) {
    out << i;
    for (std::size_t j = 0; j < cm.k(); ++j) out << ',' << cm(i, j);
    out << '\n';
  }
  return out.str();
}

template <class Set>
RunOutcome train_entry(const Splits<Set>& data, std::vector<LayerSpec> layers, const Shape& sample,
                       const CompareConfig& cfg, const CompareSeeds& seeds) {
  RunOutcome r;
  Network net(sample, std::move(layers), seeds.init);
  TrainConfig tc = cfg.train;
  tc.seed = seeds.train;
  if constexpr (std::is_same_v<Set, LabeledSet>) {
    r.train = train_loop(net, data, tc);
    const auto predicted = predict_labels(net, data.test.features);
    const auto cm = confusion_from_predictions(data.test.labels, predicted, static_cast<std::size_t>(data.test.k));
    r.metrics = classification_report(cm);
    r.confusion_csv = confusion_csv(cm);
  } else {
    r.train = train_loop(net, data, tc, cfg.loss);
    r.metrics = segmentation_report(predict_probabilities(net, data.test.images), data.test.masks);
  }
  if (r.train.diverged) r.status = "diverged";
  std::ostringstream ckpt;
  save_checkpoint(ckpt, net);
  r.checkpoint = ckpt.str();
  std::ostringstream hist;
  write_history_csv(hist, r.train.history);
  r.history_csv = hist.str();
  return r;
}

std::size_t worker_count(std::size_t jobs) {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("ASAUKIT_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v >= 1) n = static_cast<std::size_t>(v);
  }
  return std::min(n, jobs);
}

// Runs job(i) for i in [0, jobs) on up to worker_count threads; results are
// indexed by job so scheduling never affects output order.
template <class Fn>
std::vector<RunOutcome> run_parallel(std::size_t jobs, Fn job) {
  std::vector<RunOutcome> results(jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs; i = next++) {
      try {
        results[i] = job(i);
      } catch (const std::exception& e) {
        results[i].status = std::string("error: ") + e.what();
      }
    }
  };
  const std::size_t threads = worker_count(jobs);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return results;
}

// ---------------------------------------------------------------- gradcheck

ordered_json scalar_check_json(const ScalarCheck& c) {
  ordered_json j;
  j["partial"] = std::string(partial_name(c.arg));
  j["x"] = c.x;
  j["a"] = c.params.a;
  j["b"] = c.params.b;
  j["alpha"] = c.params.alpha;
  j["beta"] = c.params.beta;
  j["analytic"] = c.analytic;
  j["numeric"] = c.numeric;
  j["abs_err"] = c.abs_err;
  j["rel_err"] = c.rel_err;
  j["score"] = c.score;
  return j;
}

}  // namespace

ordered_json resolve_config(const CommandOptions& options) {
  ordered_json config = default_config();
  if (options.config_path) {
    std::ifstream in(*options.config_path);
    if (!in) throw UsageError("cannot open config file '" + *options.config_path + "'");
    ordered_json file;
    try {
      file = ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw UsageError("config file '" + *options.config_path + "' is not valid JSON: " + e.what());
    }
    if (!file.is_object()) throw UsageError("config file must hold a JSON object");
    merge_into(config, file);
  }
  for (const auto& o : options.overrides) apply_override(config, o);
  if (options.seed) config["seed"] = *options.seed;
  if (options.out_dir) config["out"] = *options.out_dir;
  return config;
}

int cmd_curves(const ordered_json& config, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const CurvesConfig cfg = parse_curves(config);
  const fs::path dir = prepare_out_dir(config);

  ordered_json manifest = manifest_header("curves", config);
  manifest["outputs"] = ordered_json::array();
  for (const auto& fam : cfg.families) {
    std::vector<AsauParams> params;
    for (double alpha : cfg.alphas) {
      for (double beta : cfg.betas) params.emplace_back(fam.a, fam.b, alpha, beta);
    }
    const CurveTable table = build_curve_table(cfg.grid, params);
    std::ostringstream csv;
    write_curve_csv(csv, table);
    const std::string name = "curves_" + file_token(fam.name) + ".csv";
    write_text(dir / name, csv.str());
    manifest["outputs"].push_back(name);

    double worst = 0.0;
    for (const auto& s : table.series) {
      for (std::size_t i = 0; i < s.values.size(); ++i) worst = std::max(worst, std::abs(s.values[i] - table.target_values[i]));
    }
    log << name << ": " << table.series.size() << " series x " << table.x_grid.size()
        << " points, max |asau - target| = " << format_real(worst) << '\n';
  }
  write_json(dir / "manifest.json", manifest);
  write_timing(dir, seconds_since(start));
  return kExitOk;
}

int cmd_gradcheck(const ordered_json& config, std::ostream& log, const PartialsFn& partials) {
  const auto start = std::chrono::steady_clock::now();
  const GradcheckConfig cfg = parse_gradcheck(config);
  const std::uint64_t seed = parse_seed(config);
  const fs::path dir = prepare_out_dir(config);

  const auto scalar = run_scalar_gradient_suite(cfg.samples, seed, partials,
                                                ScalarGradTolerance{cfg.rel_tol, cfg.abs_tol, cfg.abs_tol});
  ordered_json report;
  ordered_json sj;
  sj["passed"] = scalar.passed();
  sj["samples"] = scalar.samples;
  sj["checks"] = scalar.checks;
  sj["failures"] = scalar.failures;
  sj["rel_tol"] = cfg.rel_tol;
  sj["abs_tol"] = cfg.abs_tol;
  for (std::size_t k = 0; k < kAsauArgs.size(); ++k) {
    const std::string name(partial_name(kAsauArgs[k]));
    sj["failures_by_partial"][name] = scalar.failures_by_arg[k];
    sj["worst_score_by_partial"][name] = scalar.worst_score_by_arg[k];
  }
  sj["worst"] = ordered_json::array();
  for (const auto& c : scalar.worst) sj["worst"].push_back(scalar_check_json(c));

  log << "scalar suite: " << scalar.checks << " checks over " << scalar.samples << " samples, " << scalar.failures
      << " failures\n";
  for (std::size_t k = 0; k < kAsauArgs.size(); ++k) {
    if (scalar.failures_by_arg[k] > 0) {
      log << "  FAIL " << partial_name(kAsauArgs[k]) << ": " << scalar.failures_by_arg[k] << " mismatches\n";
    }
  }
  bool passed = scalar.passed();

  ordered_json nj;
  nj["enabled"] = cfg.network;
  if (cfg.network) {
    const auto net = run_network_gradient_suite(seed, cfg.step, cfg.tolerance);
    nj["passed"] = net.passed();
    nj["step"] = net.step;
    nj["tolerance"] = net.tolerance;
    nj["parameters"] = net.report.entries.size();
    nj["excluded_pooling_ties"] = net.report.excluded();
    nj["worst"] = ordered_json::array();
    for (std::size_t i = 0; i < std::min<std::size_t>(10, net.report.entries.size()); ++i) {
      const auto& e = net.report.entries[i];
      nj["worst"].push_back(ordered_json{{"name", e.name},
                                         {"analytic", e.analytic},
                                         {"numeric", e.numeric},
                                         {"rel_err", e.rel_err},
                                         {"pooling_tie", e.pooling_tie}});
    }
    log << "network suite: " << net.report.entries.size() << " parameters, "
        << (net.passed() ? "pass" : "FAIL") << " (worst rel_err "
        << (net.report.entries.empty() ? "n/a" : format_real(net.report.entries.front().rel_err)) << ")\n";
    passed = passed && net.passed();
  }

  report["passed"] = passed;
  report["scalar"] = sj;
  report["network"] = nj;
  write_json(dir / "gradcheck_report.json", report);
  ordered_json manifest = manifest_header("gradcheck", config);
  manifest["passed"] = passed;
  write_json(dir / "manifest.json", manifest);
  write_timing(dir, seconds_since(start));
  return passed ? kExitOk : kExitCheckFailed;
}

int cmd_compare(const ordered_json& config, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const CompareConfig cfg = parse_compare(config);
  const CompareSeeds seeds = derive_seeds(parse_seed(config));
  const fs::path dir = prepare_out_dir(config);
  const SplitSpec split{cfg.train.split, seeds.split};

  std::vector<RunOutcome> outcomes;
  if (cfg.task == Task::classification) {
    LabeledSet set;
    if (cfg.dataset.kind == "two_moons") {
      set = gen_two_moons(cfg.dataset.n, cfg.dataset.noise_sd, seeds.data);
    } else if (cfg.dataset.kind == "blobs") {
      set = gen_blobs(cfg.dataset.n, cfg.dataset.k, cfg.dataset.spread, seeds.data, cfg.dataset.dim);
    } else {
      set = load_idx(cfg.dataset.images, cfg.dataset.labels);
    }
    const auto data = split_dataset(set, split);
    const Shape sample(set.features.shape().begin() + 1, set.features.shape().end());
    outcomes = run_parallel(cfg.roster.size(), [&](std::size_t i) {
      return train_entry(data, classifier_layers(sample, static_cast<std::size_t>(set.k), cfg.hidden, cfg.roster[i].spec),
                         sample, cfg, seeds);
    });
  } else {
    if (cfg.dataset.h % 4 != 0 || cfg.dataset.w % 4 != 0) {
      throw UsageError("config: segmentation images need h and w divisible by 4");
    }
    const MaskSet set = gen_shapes_seg(cfg.dataset.n, cfg.dataset.h, cfg.dataset.w, seeds.data);
    const auto data = split_dataset(set, split);
    const Shape sample{1, cfg.dataset.h, cfg.dataset.w};
    outcomes = run_parallel(cfg.roster.size(), [&](std::size_t i) {
      return train_entry(data, segmenter_layers(cfg.channels[0], cfg.channels[1], cfg.roster[i].spec), sample, cfg,
                         seeds);
    });
  }

  const auto keys = metric_keys(cfg.task);
  std::ostringstream table;
  table << "activation,status";
  for (const auto& k : keys) table << ',' << k;
  table << '\n';
  ordered_json metrics = ordered_json::object();
  ordered_json manifest = manifest_header("compare", config);
  manifest["runs"] = ordered_json::array();

  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& label = cfg.roster[i].label;
    const auto& o = outcomes[i];
    table << label << ',' << o.status;
    ordered_json report = ordered_json::object();
    for (const auto& k : keys) {
      double v = std::numeric_limits<double>::quiet_NaN();
      for (const auto& [name, value] : o.metrics.entries) {
        if (name == k) v = value;
      }
      table << ',' << format_real(v);
      report[k] = v;
    }
    table << '\n';
    metrics[label] = report;

    ordered_json run;
    run["activation"] = label;
    run["status"] = o.status;
    run["epochs_run"] = o.train.history.size();
    run["best_epoch"] = o.train.best_epoch;
    run["best_val_metric"] = o.train.best_val_metric;
    run["stopped_early"] = o.train.stopped_early;
    run["metrics"] = report;
    manifest["runs"].push_back(run);

    const std::string token = file_token(label);
    if (!o.history_csv.empty()) write_text(dir / ("history_" + token + ".csv"), o.history_csv);
    if (!o.checkpoint.empty()) write_text(dir / ("model_" + token + ".ckpt"), o.checkpoint);
    if (!o.confusion_csv.empty()) write_text(dir / ("confusion_" + token + ".csv"), o.confusion_csv);

    log << label << " [" << o.status << "] epochs=" << o.train.history.size() << " best_epoch=" << o.train.best_epoch;
    for (const auto& k : keys) log << ' ' << k << '=' << format_real(report[k].is_number() ? report[k].get<double>() : std::nan(""));
    log << '\n';
  }
  write_text(dir / "metrics.csv", table.str());
  write_json(dir / "metrics.json", metrics);
  write_json(dir / "manifest.json", manifest);
  write_timing(dir, seconds_since(start));
  return kExitOk;
}

int cmd_sweep(const ordered_json& config, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const SweepConfig cfg = parse_sweep(config);
  const fs::path dir = prepare_out_dir(config);
  const SweepReport report = beta_sweep(cfg.base, cfg.betas, cfg.grid);
  std::ostringstream csv;
  write_sweep_csv(csv, report);
  write_text(dir / "sweep.csv", csv.str());

  const bool monotone = report.strictly_decreasing();
  ordered_json manifest = manifest_header("sweep", config);
  manifest["strictly_decreasing"] = monotone;
  write_json(dir / "manifest.json", manifest);
  write_timing(dir, seconds_since(start));

  for (std::size_t i = 0; i < report.betas.size(); ++i) {
    log << "beta=" << format_real(report.betas[i]) << " sup_error=" << format_real(report.sup_errors[i]) << '\n';
  }
  log << (monotone ? "sup error strictly decreasing in beta\n" : "FAIL: sup error is not strictly decreasing in beta\n");
  return monotone ? kExitOk : kExitCheckFailed;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"asaukit: adaptive smooth activation toolkit", "asaukit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  CommandOptions options;
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::vector<CLI::App*> subs;
  const std::pair<const char*, const char*> commands[] = {
      {"curves", "emit ASAU curve families as CSV"},
      {"gradcheck", "verify analytic gradients against finite differences"},
      {"compare", "train one model per activation and tabulate metrics"},
      {"sweep", "measure sup approximation error over a beta sweep"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--override", options.overrides, "key.path=value (repeatable)");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  CLI::App* chosen = nullptr;
  for (auto* s : subs) {
    if (s->parsed()) chosen = s;
  }
  if (chosen->count("--config")) options.config_path = config_path;
  if (chosen->count("--out")) options.out_dir = out_dir;
  if (chosen->count("--seed")) options.seed = seed;

  try {
    const auto config = resolve_config(options);
    const std::string name = chosen->get_name();
    if (name == "curves") return cmd_curves(config, out);
    if (name == "gradcheck") return cmd_gradcheck(config, out);
    if (name == "compare") return cmd_compare(config, out);
    return cmd_sweep(config, out);
  } catch (const UsageError& e) {
    err << "asaukit: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "asaukit: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "asaukit: unexpected failure: " << e.what() << '\n';
    return kExitCheckFailed;
  }
}

}  // namespace asaukit::cli
