#pragma once

// Curve families and approximation-error measurements for ASAU against its
// exact max(a*x, b*x) target.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "asaukit/activation.hpp"

namespace asaukit {

/// Uniform grid lo, lo + step, ... up to hi (inclusive within 1e-9 steps).
struct GridSpec {
  double lo = -5.0;
  double hi = 5.0;
  double step = 1e-3;

  /// Throws PreconditionError unless lo < hi, step > 0 and all are finite.
  void validate() const;
  std::size_t count() const;
  /// Points are lo + i*step (computed by index, not accumulation).
  std::vector<double> points() const;
};

struct CurveSeries {
  std::string label;
  AsauParams params;
  std::vector<double> values;
};

struct CurveTable {
  std::vector<double> x_grid;
  std::vector<CurveSeries> series;
  std::vector<double> target_values;
};

struct SweepReport {
  std::vector<double> betas;
  std::vector<double> sup_errors;
  GridSpec grid;

  bool strictly_decreasing() const;
};

/// Evaluates every parameter set on the grid. All sets must share (a, b).
CurveTable build_curve_table(const GridSpec& grid, std::span<const AsauParams> params_list);

/// max over the grid of |asau_forward(x, p) - max(a*x, b*x)|.
double sup_error(const AsauParams& p, const GridSpec& grid);

/// sup_error of `base` with beta replaced by each entry of `betas` (strictly increasing, > 0).
SweepReport beta_sweep(const AsauParams& base, std::span<const double> betas, const GridSpec& grid);

/// "asau[a=...;b=...;alpha=...;beta=...]" with 17 significant digits; comma free for CSV.
std::string series_label(const AsauParams& p);
std::optional<AsauParams> parse_series_label(std::string_view label);

/// %.17g formatting used by every numeric text output.
std::string format_real(double v);

/// Header `x,target,<label>...`, one row per grid point.
void write_curve_csv(std::ostream& out, const CurveTable& table);
/// Inverse of write_curve_csv. Series labels must parse with parse_series_label.
CurveTable read_curve_csv(std::istream& in);

/// Header `beta,sup_error`.
void write_sweep_csv(std::ostream& out, const SweepReport& report);

}  // namespace asaukit
