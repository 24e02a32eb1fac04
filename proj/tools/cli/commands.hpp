#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "asaukit/gradcheck.hpp"

namespace asaukit::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitUsage = 2 };

struct CommandOptions {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::vector<std::string> overrides;
};

/// Defaults, then the config file, then --override assignments, then --seed/--out.
nlohmann::ordered_json resolve_config(const CommandOptions& options);

/// One CSV per curve family: curves_<name>.csv.
int cmd_curves(const nlohmann::ordered_json& config, std::ostream& log);

/// Scalar suite plus (optionally) the micro-network suite; gradcheck_report.json.
/// `partials` exists so tests can inject a faulty derivative.
int cmd_gradcheck(const nlohmann::ordered_json& config, std::ostream& log, const PartialsFn& partials = asau_partials);

/// Trains one model per roster entry; metrics.csv, metrics.json, manifest.json,
/// history_<label>.csv, model_<label>.ckpt (and confusion_<label>.csv for classification).
int cmd_compare(const nlohmann::ordered_json& config, std::ostream& log);

/// sweep.csv with (beta, sup_error); exit 1 unless strictly decreasing.
int cmd_sweep(const nlohmann::ordered_json& config, std::ostream& log);

/// Full command line: asaukit <curves|gradcheck|compare|sweep> [options].
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace asaukit::cli
