// Parameter sweeps over one axis with analytic and/or Monte Carlo columns.
#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "raglsa/config.hpp"

namespace raglsa {

enum class SweepAxis { N, M, Delta2, Q, QTilde, Ratio };
enum class SweepMode { Analytic, MonteCarlo, Both };
enum class OutputFormat { Csv, Json };

std::string_view axis_name(SweepAxis axis);
SweepAxis parse_axis(std::string_view name);
std::string_view mode_name(SweepMode mode);
SweepMode parse_mode(std::string_view name);
std::string_view format_name(OutputFormat format);
OutputFormat parse_format(std::string_view name);

/// Accepts "a:b" (step 1), "a:b:step" (both ends inclusive) or "v1,v2,...".
std::vector<double> parse_values(std::string_view text);

struct SweepSpec {
  ExperimentConfig base;
  SweepAxis axis = SweepAxis::N;
  std::vector<double> values;
  SweepMode mode = SweepMode::Analytic;
  std::string out_path;  // empty: caller decides (stdout)
  OutputFormat format = OutputFormat::Csv;
  std::size_t workers = 1;
};

/// Throws ConfigError for an empty or non-increasing value list, a value that
/// does not fit the axis, or an axis that does not exist in the base regime.
void validate(const SweepSpec& spec);

/// Config for one sweep point. Axis semantics:
///   n, m        counts (integers)
///   delta2      uniform regime offset variance
///   q           schedule exponent (dpn, mixture)
///   q_tilde     mixture probability exponent
///   ratio       fraction of a fixed budget N = m + n given to retrieval:
///               n = round(ratio * N), m = N - n (m must stay >= 1)
ExperimentConfig point_config(const SweepSpec& spec, double value);

struct ResultRow {
  std::string axis;
  double value = 0.0;
  std::string regime;
  std::uint64_t seed = 0;
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t d = 0;
  std::optional<double> analytic_variance, analytic_bias, analytic_total;
  double irreducible = 0.0;
  std::optional<double> mc_variance, mc_bias, mc_total;
  std::optional<double> mc_variance_stderr, mc_bias_stderr, mc_total_stderr;
  std::optional<std::size_t> mc_trials;
  /// Optimal retrieval count for the row's (m, d, noise); uniform regime only.
  std::optional<std::size_t> n_star;
};

/// Column names in CSV order.
const std::vector<std::string>& result_columns();

/// One row per value, in axis order. W = optimal_pretrained_weight(m, n, d)
/// is rebuilt at every point.
std::vector<ResultRow> run_sweep(const SweepSpec& spec);

/// "# key=value" lines for the resolved config and sweep, then the header and rows.
void write_csv(std::ostream& out, const SweepSpec& spec, const std::vector<ResultRow>& rows);
void write_json(std::ostream& out, const SweepSpec& spec, const std::vector<ResultRow>& rows);

bool is_sweep_key(std::string_view key);
/// Overlays experiment keys plus axis, values, mode, format, out and workers;
/// throws ConfigError on unknown keys.
SweepSpec apply_sweep_keys(SweepSpec spec, const KeyValues& values);

/// Resolved config plus sweep keys, as emitted in output metadata.
KeyValues sweep_to_keys(const SweepSpec& spec);

/// RFC-4180 quoting: wraps in quotes when the field has a comma, quote or newline.
std::string csv_field(std::string_view text);

}  // namespace raglsa
