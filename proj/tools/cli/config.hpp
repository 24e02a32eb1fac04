#pragma once

// Typed views of the asaukit JSON config. Each command parses only its own
// section so that an unrelated section cannot break it.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "asaukit/approximation.hpp"
#include "asaukit/losses.hpp"
#include "asaukit/network.hpp"
#include "asaukit/trainer.hpp"

namespace asaukit::cli {

/// Bad flags, config values or overrides; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CurveFamily {
  std::string name;
  double a = 0.0;
  double b = 1.0;
};

struct CurvesConfig {
  GridSpec grid{-5.0, 5.0, 0.01};
  std::vector<CurveFamily> families;
  std::vector<double> alphas;
  std::vector<double> betas;
};

struct GradcheckConfig {
  std::size_t samples = 1000;
  bool network = true;
  double step = 1e-5;
  double tolerance = 1e-4;
  double rel_tol = 1e-6;
  double abs_tol = 1e-8;
};

struct SweepConfig {
  AsauParams base;
  std::vector<double> betas;
  GridSpec grid;
};

struct RosterEntry {
  std::string label;
  ActivationSpec spec;
};

enum class Task { classification, segmentation };

struct DatasetConfig {
  std::string kind = "two_moons";  ///< two_moons | blobs | idx | shapes
  std::size_t n = 1000;
  double noise_sd = 0.1;
  int k = 3;
  double spread = 1.0;
  std::size_t dim = 2;
  std::size_t h = 32;
  std::size_t w = 32;
  std::string images;
  std::string labels;
};

struct CompareConfig {
  Task task = Task::classification;
  DatasetConfig dataset;
  std::vector<RosterEntry> roster;
  TrainConfig train;
  std::size_t hidden = 16;
  std::vector<std::size_t> channels{8, 16};
  MaskLoss loss = MaskLoss::bce_dice;
};

/// Built-in defaults for every section; a config file and overrides are merged on top.
nlohmann::ordered_json default_config();

/// Applies `key.path=value`; value is parsed as JSON, falling back to a string.
void apply_override(nlohmann::ordered_json& config, const std::string& assignment);

/// Recursively merges `patch` into `base` (objects merge, everything else replaces).
void merge_into(nlohmann::ordered_json& base, const nlohmann::ordered_json& patch);

std::uint64_t parse_seed(const nlohmann::ordered_json& config);
std::string parse_out_dir(const nlohmann::ordered_json& config);

CurvesConfig parse_curves(const nlohmann::ordered_json& config);
GradcheckConfig parse_gradcheck(const nlohmann::ordered_json& config);
SweepConfig parse_sweep(const nlohmann::ordered_json& config);
CompareConfig parse_compare(const nlohmann::ordered_json& config);

RosterEntry parse_roster_entry(const nlohmann::ordered_json& entry);

}  // namespace asaukit::cli
