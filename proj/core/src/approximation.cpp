#include "asaukit/approximation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include "asaukit/error.hpp"

namespace asaukit {

namespace {

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    parts.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double parse_real(std::string_view text) {
  std::string buf(text);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size()) {
    throw FormatError("not a number: '" + buf + "'");
  }
  return v;
}

}  // namespace

void GridSpec::validate() const {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !std::isfinite(step)) {
    throw PreconditionError("grid bounds and step must be finite");
  }
  if (!(lo < hi)) throw PreconditionError("grid requires lo < hi");
  if (!(step > 0.0)) throw PreconditionError("grid requires step > 0");
}

std::size_t GridSpec::count() const {
  validate();
  return static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
}

std::vector<double> GridSpec::points() const {
  const std::size_t n = count();
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = lo + static_cast<double>(i) * step;
  return xs;
}

bool SweepReport::strictly_decreasing() const {
  for (std::size_t i = 1; i < sup_errors.size(); ++i) {
    if (!(sup_errors[i] < sup_errors[i - 1])) return false;
  }
  return true;
}

CurveTable build_curve_table(const GridSpec& grid, std::span<const AsauParams> params_list) {
  if (params_list.empty()) throw PreconditionError("build_curve_table: params_list is empty");
  const double a = params_list.front().a;
  const double b = params_list.front().b;
  for (const auto& p : params_list) {
    if (p.a != a || p.b != b) {
      throw PreconditionError("build_curve_table: all parameter sets must share (a, b); got (" + format_real(a) +
                              ", " + format_real(b) + ") and (" + format_real(p.a) + ", " + format_real(p.b) + ")");
    }
  }

  CurveTable table;
  table.x_grid = grid.points();
  table.target_values.reserve(table.x_grid.size());
  for (double x : table.x_grid) table.target_values.push_back(exact_max2(a * x, b * x));

  for (const auto& p : params_list) {
    CurveSeries s{series_label(p), p, {}};
    s.values.reserve(table.x_grid.size());
    for (double x : table.x_grid) s.values.push_back(asau_forward(x, p));
    table.series.push_back(std::move(s));
  }
  return table;
}

double sup_error(const AsauParams& p, const GridSpec& grid) {
  const std::size_t n = grid.count();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid.lo + static_cast<double>(i) * grid.step;
    worst = std::max(worst, std::abs(asau_forward(x, p) - exact_max2(p.a * x, p.b * x)));
  }
  return worst;
}

SweepReport beta_sweep(const AsauParams& base, std::span<const double> betas, const GridSpec& grid) {
  if (betas.empty()) throw PreconditionError("beta_sweep: no beta values");
  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (!(betas[i] > 0.0) || !std::isfinite(betas[i])) throw PreconditionError("beta_sweep: betas must be finite and > 0");
    if (i > 0 && !(betas[i] > betas[i - 1])) throw PreconditionError("beta_sweep: betas must be strictly increasing");
  }
  grid.validate();

  SweepReport report;
  report.grid = grid;
  report.betas.assign(betas.begin(), betas.end());
  for (double beta : betas) report.sup_errors.push_back(sup_error(base.with_beta(beta), grid));
  return report;
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string series_label(const AsauParams& p) {
  return "asau[a=" + format_real(p.a) + ";b=" + format_real(p.b) + ";alpha=" + format_real(p.alpha) +
         ";beta=" + format_real(p.beta) + "]";
}

std::optional<AsauParams> parse_series_label(std::string_view label) {
  constexpr std::string_view prefix = "asau[";
  if (!label.starts_with(prefix) || !label.ends_with("]")) return std::nullopt;
  label.remove_prefix(prefix.size());
  label.remove_suffix(1);
  const auto fields = split(label, ';');
  if (fields.size() != 4) return std::nullopt;
  constexpr std::string_view keys[] = {"a=", "b=", "alpha=", "beta="};
  double values[4];
  try {
    for (std::size_t i = 0; i < 4; ++i) {
      if (!std::string_view(fields[i]).starts_with(keys[i])) return std::nullopt;
      values[i] = parse_real(std::string_view(fields[i]).substr(keys[i].size()));
    }
    return AsauParams(values[0], values[1], values[2], values[3]);
  } catch (const Error&) {
    return std::nullopt;
  }
}

void write_curve_csv(std::ostream& out, const CurveTable& table) {
  out << "x,target";
  for (const auto& s : table.series) out << ',' << s.label;
  out << '\n';
  for (std::size_t i = 0; i < table.x_grid.size(); ++i) {
    out << format_real(table.x_grid[i]) << ',' << format_real(table.target_values[i]);
    for (const auto& s : table.series) out << ',' << format_real(s.values[i]);
    out << '\n';
  }
}

CurveTable read_curve_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("curve CSV: missing header");
  const auto header = split(line, ',');
  if (header.size() < 2 || header[0] != "x" || header[1] != "target") {
    throw FormatError("curve CSV: header must start with 'x,target'");
  }

  CurveTable table;
  for (std::size_t c = 2; c < header.size(); ++c) {
    auto params = parse_series_label(header[c]);
    if (!params) throw FormatError("curve CSV: unrecognised series label '" + header[c] + "'");
    table.series.push_back({header[c], *params, {}});
  }

  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != header.size()) {
      throw FormatError("curve CSV: row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                        " cells, expected " + std::to_string(header.size()));
    }
    table.x_grid.push_back(parse_real(cells[0]));
    table.target_values.push_back(parse_real(cells[1]));
    for (std::size_t c = 2; c < cells.size(); ++c) table.series[c - 2].values.push_back(parse_real(cells[c]));
  }
  return table;
}

void write_sweep_csv(std::ostream& out, const SweepReport& report) {
  out << "beta,sup_error\n";
  for (std::size_t i = 0; i < report.betas.size(); ++i) {
    out << format_real(report.betas[i]) << ',' << format_real(report.sup_errors[i]) << '\n';
  }
}

}  // namespace asaukit
