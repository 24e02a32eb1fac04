#include "config.hpp"

#include <cmath>

#include "asaukit/error.hpp"

namespace asaukit::cli {

using nlohmann::ordered_json;

namespace {

const ordered_json& section(const ordered_json& config, const char* name) {
  if (!config.contains(name) || !config[name].is_object()) {
    throw UsageError(std::string("config: missing section '") + name + "'");
  }
  return config[name];
}

template <class T>
T get_or(const ordered_json& obj, const char* key, T fallback) {
  if (!obj.contains(key) || obj[key].is_null()) return fallback;
  try {
    return obj[key].get<T>();
  } catch (const nlohmann::json::exception&) {
    throw UsageError(std::string("config: key '") + key + "' has the wrong type");
  }
}

double get_real(const ordered_json& obj, const char* key, double fallback) {
  const double v = get_or<double>(obj, key, fallback);
  if (!std::isfinite(v)) throw UsageError(std::string("config: key '") + key + "' must be finite");
  return v;
}

std::size_t get_count(const ordered_json& obj, const char* key, std::size_t fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer() || obj[key].get<std::int64_t>() < 0) {
    throw UsageError(std::string("config: key '") + key + "' must be a non-negative integer");
  }
  return obj[key].get<std::size_t>();
}

std::vector<double> get_reals(const ordered_json& obj, const char* key) {
  if (!obj.contains(key) || !obj[key].is_array()) throw UsageError(std::string("config: '") + key + "' must be a list");
  std::vector<double> out;
  for (const auto& v : obj[key]) {
    if (!v.is_number()) throw UsageError(std::string("config: '") + key + "' must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

GridSpec parse_grid(const ordered_json& obj) {
  if (!obj.is_object()) throw UsageError("config: grid must be an object with lo, hi, step");
  GridSpec g{get_real(obj, "lo", -5.0), get_real(obj, "hi", 5.0), get_real(obj, "step", 1e-3)};
  try {
    g.validate();
  } catch (const PreconditionError& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  return g;
}

AsauParams parse_params(const ordered_json& obj, const AsauParams& fallback) {
  try {
    return AsauParams(get_real(obj, "a", fallback.a), get_real(obj, "b", fallback.b),
                      get_real(obj, "alpha", fallback.alpha), get_real(obj, "beta", fallback.beta));
  } catch (const PreconditionError& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
}

}  // namespace

ordered_json default_config() {
  return ordered_json::parse(R"({
    "seed": 1234,
    "out": "asaukit_out",
    "curves": {
      "grid": {"lo": -5, "hi": 5, "step": 0.01},
      "families": [
        {"name": "max", "a": 1, "b": 2},
        {"name": "leaky", "a": 0.01, "b": 1},
        {"name": "relu", "a": 0, "b": 1}
      ],
      "alphas": [0.5, 1, 2],
      "betas": [1, 5, 20]
    },
    "gradcheck": {
      "samples": 1000,
      "network": true,
      "step": 1e-5,
      "tolerance": 1e-4,
      "rel_tol": 1e-6,
      "abs_tol": 1e-8
    },
    "sweep": {
      "base": {"a": 0, "b": 1, "alpha": 1},
      "betas": [1, 10, 100, 1000, 10000],
      "grid": {"lo": -5, "hi": 5, "step": 0.001}
    },
    "compare": {
      "task": "classification",
      "dataset": {"kind": "two_moons", "n": 1000, "noise_sd": 0.1},
      "model": {"hidden": 16, "channels": [8, 16]},
      "roster": [{"kind": "relu"}, {"kind": "asau", "beta": 5}],
      "train": {
        "max_epochs": 200,
        "batch_size": 32,
        "lr": 0.03,
        "patience": 50,
        "weight_decay": 1e-4,
        "split": [0.8, 0.1, 0.1]
      },
      "loss": "bce_dice"
    }
  })");
}

void merge_into(ordered_json& base, const ordered_json& patch) {
  if (!base.is_object() || !patch.is_object()) {
    base = patch;
    return;
  }
  for (const auto& [key, value] : patch.items()) {
    if (base.contains(key) && base[key].is_object() && value.is_object()) {
      merge_into(base[key], value);
    } else {
      base[key] = value;
    }
  }
}

void apply_override(ordered_json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("override '" + assignment + "' is not key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);

  ordered_json value;
  try {
    value = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    value = text;
  }

  ordered_json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw UsageError("override '" + assignment + "' has an empty key segment");
    if (!node->is_object()) throw UsageError("override '" + assignment + "': '" + key + "' is not inside an object");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = ordered_json::object();
    start = dot + 1;
  }
}

std::uint64_t parse_seed(const ordered_json& config) {
  if (!config.contains("seed") || !config["seed"].is_number_unsigned()) {
    throw UsageError("config: 'seed' must be a non-negative integer");
  }
  return config["seed"].get<std::uint64_t>();
}

std::string parse_out_dir(const ordered_json& config) {
  const auto out = get_or<std::string>(config, "out", "");
  if (out.empty()) throw UsageError("config: 'out' must name an output directory");
  return out;
}

CurvesConfig parse_curves(const ordered_json& config) {
  const auto& s = section(config, "curves");
  CurvesConfig c;
  c.grid = parse_grid(s.value("grid", ordered_json::object()));
  if (!s.contains("families") || !s["families"].is_array() || s["families"].empty()) {
    throw UsageError("config: curves.families must be a nonempty list");
  }
  for (const auto& f : s["families"]) {
    CurveFamily fam{get_or<std::string>(f, "name", ""), get_real(f, "a", 0.0), get_real(f, "b", 1.0)};
    if (fam.name.empty() || fam.name.find_first_of("/\\") != std::string::npos) {
      throw UsageError("config: every curve family needs a plain name");
    }
    c.families.push_back(std::move(fam));
  }
  c.alphas = get_reals(s, "alphas");
  c.betas = get_reals(s, "betas");
  if (c.alphas.empty() || c.betas.empty()) throw UsageError("config: curves.alphas and curves.betas must be nonempty");
  return c;
}

GradcheckConfig parse_gradcheck(const ordered_json& config) {
  const auto& s = section(config, "gradcheck");
  GradcheckConfig g;
  g.samples = get_count(s, "samples", g.samples);
  if (g.samples == 0) throw UsageError("config: gradcheck.samples must be >= 1");
  g.network = get_or<bool>(s, "network", g.network);
  g.step = get_real(s, "step", g.step);
  g.tolerance = get_real(s, "tolerance", g.tolerance);
  g.rel_tol = get_real(s, "rel_tol", g.rel_tol);
  g.abs_tol = get_real(s, "abs_tol", g.abs_tol);
  if (!(g.step > 0.0) || !(g.tolerance > 0.0) || !(g.rel_tol > 0.0) || !(g.abs_tol > 0.0)) {
    throw UsageError("config: gradcheck step and tolerances must be > 0");
  }
  return g;
}

SweepConfig parse_sweep(const ordered_json& config) {
  const auto& s = section(config, "sweep");
  SweepConfig c;
  c.base = parse_params(s.value("base", ordered_json::object()), AsauParams{});
  c.betas = get_reals(s, "betas");
  if (c.betas.empty()) throw UsageError("config: sweep.betas must be nonempty");
  for (std::size_t i = 0; i < c.betas.size(); ++i) {
    if (!(c.betas[i] > 0.0)) throw UsageError("config: sweep.betas must be > 0");
    if (i > 0 && !(c.betas[i] > c.betas[i - 1])) throw UsageError("config: sweep.betas must be strictly increasing");
  }
  c.grid = parse_grid(s.value("grid", ordered_json::object()));
  return c;
}

RosterEntry parse_roster_entry(const ordered_json& entry) {
  if (!entry.is_object()) throw UsageError("config: roster entries must be objects");
  const auto kind = get_or<std::string>(entry, "kind", "");
  RosterEntry r;
  if (kind == "asau") {
    AsauActivation a;
    a.params = parse_params(entry, AsauParams{});
    if (entry.contains("trainable")) {
      const auto& t = entry["trainable"];
      if (!t.is_object()) throw UsageError("config: asau 'trainable' must be an object of a/b/alpha/beta flags");
      a.trainable = {get_or<bool>(t, "a", false), get_or<bool>(t, "b", false), get_or<bool>(t, "alpha", true),
                     get_or<bool>(t, "beta", true)};
    }
    const auto gran = get_or<std::string>(entry, "granularity", "layer");
    if (gran == "layer") {
      a.granularity = Granularity::per_layer;
    } else if (gran == "channel") {
      a.granularity = Granularity::per_channel;
    } else {
      throw UsageError("config: asau granularity must be 'layer' or 'channel'");
    }
    r.spec = a;
  } else if (kind == "relu") {
    r.spec = BaselineActivation{Relu{}, false};
  } else if (kind == "lrelu") {
    r.spec = BaselineActivation{LeakyRelu{get_real(entry, "slope", 0.01)}, get_or<bool>(entry, "slope_trainable", false)};
  } else if (kind == "prelu") {
    r.spec = BaselineActivation{PRelu{get_real(entry, "slope", 0.25)}, get_or<bool>(entry, "slope_trainable", true)};
  } else if (kind == "mish") {
    r.spec = BaselineActivation{Mish{}, false};
  } else {
    throw UsageError("config: unknown activation kind '" + kind + "' (relu, lrelu, prelu, mish, asau)");
  }
  r.label = get_or<std::string>(entry, "label", activation_label(r.spec));
  return r;
}

CompareConfig parse_compare(const ordered_json& config) {
  const auto& s = section(config, "compare");
  CompareConfig c;

  const auto task = get_or<std::string>(s, "task", "classification");
  if (task == "classification") {
    c.task = Task::classification;
  } else if (task == "segmentation") {
    c.task = Task::segmentation;
  } else {
    throw UsageError("config: compare.task must be 'classification' or 'segmentation'");
  }

  const auto& d = s.value("dataset", ordered_json::object());
  c.dataset.kind = get_or<std::string>(d, "kind", c.task == Task::classification ? "two_moons" : "shapes");
  c.dataset.n = get_count(d, "n", c.task == Task::classification ? 1000 : 200);
  c.dataset.noise_sd = get_real(d, "noise_sd", c.dataset.noise_sd);
  c.dataset.k = static_cast<int>(get_count(d, "k", static_cast<std::size_t>(c.dataset.k)));
  c.dataset.spread = get_real(d, "spread", c.dataset.spread);
  c.dataset.dim = get_count(d, "dim", c.dataset.dim);
  c.dataset.h = get_count(d, "h", c.dataset.h);
  c.dataset.w = get_count(d, "w", c.dataset.w);
  c.dataset.images = get_or<std::string>(d, "images", "");
  c.dataset.labels = get_or<std::string>(d, "labels", "");
  const bool cls_kind = c.dataset.kind == "two_moons" || c.dataset.kind == "blobs" || c.dataset.kind == "idx";
  if (c.task == Task::classification && !cls_kind) {
    throw UsageError("config: classification datasets are two_moons, blobs or idx");
  }
  if (c.task == Task::segmentation && c.dataset.kind != "shapes") {
    throw UsageError("config: the segmentation dataset is 'shapes'");
  }

  const auto& m = s.value("model", ordered_json::object());
  c.hidden = get_count(m, "hidden", c.hidden);
  if (m.contains("channels")) {
    const auto ch = get_reals(m, "channels");
    if (ch.size() != 2) throw UsageError("config: compare.model.channels must list two widths");
    c.channels = {static_cast<std::size_t>(ch[0]), static_cast<std::size_t>(ch[1])};
  }
  if (c.hidden == 0 || c.channels[0] == 0 || c.channels[1] == 0) throw UsageError("config: model widths must be >= 1");

  if (!s.contains("roster") || !s["roster"].is_array() || s["roster"].empty()) {
    throw UsageError("config: compare.roster must list at least one activation");
  }
  for (const auto& e : s["roster"]) c.roster.push_back(parse_roster_entry(e));
  if (c.roster.size() < 2) throw UsageError("config: compare needs a roster of at least two activations");
  for (std::size_t i = 0; i < c.roster.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (c.roster[j].label == c.roster[i].label) {
        throw UsageError("config: duplicate roster label '" + c.roster[i].label + "'; set 'label' to disambiguate");
      }
    }
  }

  const auto& t = s.value("train", ordered_json::object());
  c.train.max_epochs = static_cast<int>(get_count(t, "max_epochs", 200));
  c.train.batch_size = get_count(t, "batch_size", 32);
  c.train.lr = get_real(t, "lr", 1e-2);
  c.train.patience = static_cast<int>(get_count(t, "patience", 50));
  c.train.weight_decay = get_real(t, "weight_decay", 1e-4);
  if (t.contains("split")) {
    const auto sp = get_reals(t, "split");
    if (sp.size() != 3) throw UsageError("config: compare.train.split must have three fractions");
    c.train.split = {sp[0], sp[1], sp[2]};
  }
  try {
    c.train.validate();
  } catch (const PreconditionError& e) {
    throw UsageError(std::string("config: ") + e.what());
  }

  const auto loss = get_or<std::string>(s, "loss", "bce_dice");
  if (loss == "bce_dice") {
    c.loss = MaskLoss::bce_dice;
  } else if (loss == "bce") {
    c.loss = MaskLoss::bce;
  } else if (loss == "dice") {
    c.loss = MaskLoss::soft_dice;
  } else {
    throw UsageError("config: compare.loss must be bce_dice, bce or dice");
  }
  return c;
}

}  // namespace asaukit::cli
