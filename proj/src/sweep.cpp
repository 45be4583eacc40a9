#include "raglsa/sweep.hpp"

#include <cctype>
#include <cmath>
#include <ostream>

#include "json.hpp"

#include "raglsa/analytic_loss.hpp"
#include "raglsa/montecarlo.hpp"
#include "raglsa/parallel.hpp"
#include "raglsa/predictor.hpp"

#ifndef RAGLSA_VERSION
#define RAGLSA_VERSION "0.0.0"
#endif

namespace raglsa {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::size_t as_count(double v, std::string_view axis) {
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e12)
    throw ConfigError("axis " + std::string(axis) + " needs non-negative integers, got " + format_double(v));
  return static_cast<std::size_t>(v);
}

std::string opt_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

template <typename T>
nlohmann::json opt_json(const std::optional<T>& v) {
  if (!v) return nullptr;
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(*v)) return nullptr;
  }
  return *v;
}

}  // namespace

std::string_view axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::N: return "n";
    case SweepAxis::M: return "m";
    case SweepAxis::Delta2: return "delta2";
    case SweepAxis::Q: return "q";
    case SweepAxis::QTilde: return "q_tilde";
    case SweepAxis::Ratio: return "ratio";
  }
  return "?";
}

SweepAxis parse_axis(std::string_view name) {
  for (auto a : {SweepAxis::N, SweepAxis::M, SweepAxis::Delta2, SweepAxis::Q, SweepAxis::QTilde, SweepAxis::Ratio})
    if (axis_name(a) == name) return a;
  throw ConfigError("unknown axis '" + std::string(name) + "' (expected n, m, delta2, q, q_tilde or ratio)");
}

std::string_view mode_name(SweepMode mode) {
  switch (mode) {
    case SweepMode::Analytic: return "analytic";
    case SweepMode::MonteCarlo: return "mc";
    case SweepMode::Both: return "both";
  }
  return "?";
}

SweepMode parse_mode(std::string_view name) {
  if (name == "analytic") return SweepMode::Analytic;
  if (name == "mc") return SweepMode::MonteCarlo;
  if (name == "both") return SweepMode::Both;
  throw ConfigError("unknown mode '" + std::string(name) + "' (expected analytic, mc or both)");
}

std::string_view format_name(OutputFormat format) { return format == OutputFormat::Csv ? "csv" : "json"; }

OutputFormat parse_format(std::string_view name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "json") return OutputFormat::Json;
  throw ConfigError("unknown format '" + std::string(name) + "' (expected csv or json)");
}

std::vector<double> parse_values(std::string_view text) {
  text = trim(text);
  std::vector<double> out;
  if (text.empty()) throw ConfigError("values list is empty");

  if (text.find(':') != std::string_view::npos) {
    std::vector<double> parts;
    std::size_t start = 0;
    for (;;) {
      const std::size_t colon = text.find(':', start);
      parts.push_back(parse_double(trim(text.substr(start, colon - start)), "values"));
      if (colon == std::string_view::npos) break;
      start = colon + 1;
    }
    if (parts.size() > 3) throw ConfigError("values range has the form a:b or a:b:step");
    const double lo = parts[0], hi = parts[1];
    const double step = parts.size() == 3 ? parts[2] : 1.0;
    if (!(step > 0.0)) throw ConfigError("values range step must be > 0");
    if (hi < lo) throw ConfigError("values range end is below its start");
    // Tolerance keeps "0:1:0.1" from losing its endpoint to rounding.
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    if (count > 10'000'000) throw ConfigError("values range is too long");
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) out.push_back(lo + static_cast<double>(k) * step);
    return out;
  }

  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = text.find(',', start);
    out.push_back(parse_double(trim(text.substr(start, comma - start)), "values"));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void validate(const SweepSpec& spec) {
  validate(spec.base);
  if (spec.values.empty()) throw ConfigError("sweep values are empty");
  for (std::size_t i = 1; i < spec.values.size(); ++i)
    if (!(spec.values[i] > spec.values[i - 1])) throw ConfigError("sweep values must be strictly increasing");
  if (spec.workers == 0) throw ConfigError("workers must be >= 1");
  if (spec.mode != SweepMode::Analytic && spec.base.trials < 2) throw ConfigError("Monte Carlo needs trials >= 2");

  const std::string_view regime = regime_name(spec.base.regime);
  switch (spec.axis) {
    case SweepAxis::Delta2:
      if (regime != "uniform") throw ConfigError("axis delta2 needs the uniform regime");
      break;
    case SweepAxis::Q:
      if (regime == "uniform") throw ConfigError("axis q needs the dpn or mixture regime");
      break;
    case SweepAxis::QTilde:
      if (regime != "mixture") throw ConfigError("axis q_tilde needs the mixture regime");
      break;
    case SweepAxis::Ratio:
      if (spec.base.m + spec.base.n < 2) throw ConfigError("axis ratio needs a budget m + n >= 2");
      break;
    default:
      break;
  }
  for (const double v : spec.values) validate(point_config(spec, v));
}

ExperimentConfig point_config(const SweepSpec& spec, double value) {
  ExperimentConfig c = spec.base;
  switch (spec.axis) {
    case SweepAxis::N:
      c.n = as_count(value, "n");
      break;
    case SweepAxis::M:
      c.m = as_count(value, "m");
      break;
    case SweepAxis::Delta2:
      std::get<UniformNoise>(c.regime).delta2 = value;
      break;
    case SweepAxis::Q:
      if (auto* dpn = std::get_if<DistanceProportionalNoise>(&c.regime)) dpn->q = value;
      else std::get<MixtureNoise>(c.regime).q = value;
      break;
    case SweepAxis::QTilde:
      std::get<MixtureNoise>(c.regime).q_tilde = value;
      break;
    case SweepAxis::Ratio: {
      if (!(value >= 0.0 && value <= 1.0)) throw ConfigError("ratio values must lie in [0, 1]");
      const std::size_t budget = spec.base.m + spec.base.n;
      const auto n = static_cast<std::size_t>(std::llround(value * static_cast<double>(budget)));
      c.n = n;
      c.m = budget - n;
      break;
    }
  }
  if (c.m == 0) throw ConfigError("sweep point has m = 0; the pretrained weight needs m >= 1");
  return c;
}

const std::vector<std::string>& result_columns() {
  static const std::vector<std::string> cols = {
      "axis",        "value",          "regime",          "seed",       "m",
      "n",           "d",              "variance_err",    "bias_err",   "irreducible",
      "total",       "mc_variance_err", "mc_bias_err",    "mc_total",   "mc_variance_stderr",
      "mc_bias_stderr", "mc_total_stderr", "mc_trials",   "n_star"};
  return cols;
}

std::vector<ResultRow> run_sweep(const SweepSpec& spec) {
  validate(spec);
  const bool analytic = spec.mode != SweepMode::MonteCarlo;
  const bool mc = spec.mode != SweepMode::Analytic;

  auto eval = [&](std::size_t i) {
    const double value = spec.values[i];
    const ExperimentConfig cfg = point_config(spec, value);
    const WeightMatrix W = optimal_pretrained_weight(cfg.m, cfg.n, cfg.d);

    ResultRow row;
    row.axis = axis_name(spec.axis);
    row.value = value;
    row.regime = regime_name(cfg.regime);
    row.seed = cfg.seed;
    row.m = cfg.m;
    row.n = cfg.n;
    row.d = cfg.d;
    row.irreducible = cfg.sigma2;
    if (analytic) {
      const LossBreakdown a = regime_loss(W, cfg);
      row.analytic_variance = a.variance;
      row.analytic_bias = a.bias;
      row.analytic_total = a.total;
    }
    if (mc) {
      // Points already run in parallel; the estimate itself is worker-count independent.
      const LossBreakdown e = estimate_loss(W, cfg, McOptions{1});
      row.mc_variance = e.variance;
      row.mc_bias = e.bias;
      row.mc_total = e.total;
      row.mc_variance_stderr = e.standard_error->variance;
      row.mc_bias_stderr = e.standard_error->bias;
      row.mc_total_stderr = e.standard_error->total;
      row.mc_trials = cfg.trials;
    }
    if (const auto* u = std::get_if<UniformNoise>(&cfg.regime))
      row.n_star = optimal_n(cfg.m, cfg.d, cfg.sigma2, u->sigma2_rag, cfg.beta.norm2(), u->delta2).n_star;
    return row;
  };

  return parallel_map<ResultRow>(spec.values.size(), spec.workers, eval);
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (const char ch : text) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

bool is_sweep_key(std::string_view key) {
  return key == "axis" || key == "values" || key == "mode" || key == "format" || key == "out" || key == "workers";
}

SweepSpec apply_sweep_keys(SweepSpec spec, const KeyValues& kv) {
  for (const auto& [k, v] : kv)
    if (!is_config_key(k) && !is_sweep_key(k)) throw ConfigError("unknown key '" + k + "'");
  spec.base = apply_config_keys(spec.base, kv);
  if (auto it = kv.find("axis"); it != kv.end()) spec.axis = parse_axis(it->second);
  if (auto it = kv.find("values"); it != kv.end()) spec.values = parse_values(it->second);
  if (auto it = kv.find("mode"); it != kv.end()) spec.mode = parse_mode(it->second);
  if (auto it = kv.find("format"); it != kv.end()) spec.format = parse_format(it->second);
  if (auto it = kv.find("out"); it != kv.end()) spec.out_path = it->second;
  if (auto it = kv.find("workers"); it != kv.end())
    spec.workers = static_cast<std::size_t>(parse_unsigned(it->second, "workers"));
  return spec;
}

KeyValues sweep_to_keys(const SweepSpec& spec) {
  KeyValues kv = config_to_keys(spec.base);
  kv["axis"] = axis_name(spec.axis);
  std::string values;
  for (std::size_t i = 0; i < spec.values.size(); ++i) {
    if (i) values += ',';
    values += format_double(spec.values[i]);
  }
  kv["values"] = values;
  kv["mode"] = mode_name(spec.mode);
  kv["format"] = format_name(spec.format);
  return kv;
}

void write_csv(std::ostream& out, const SweepSpec& spec, const std::vector<ResultRow>& rows) {
  out << "# raglsa " << RAGLSA_VERSION << " sweep\n";
  for (const auto& [k, v] : sweep_to_keys(spec)) out << "# " << k << '=' << v << '\n';

  const auto& cols = result_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';

  for (const ResultRow& r : rows) {
    const std::string fields[] = {
        csv_field(r.axis),
        format_double(r.value),
        csv_field(r.regime),
        std::to_string(r.seed),
        std::to_string(r.m),
        std::to_string(r.n),
        std::to_string(r.d),
        opt_field(r.analytic_variance),
        opt_field(r.analytic_bias),
        format_double(r.irreducible),
        opt_field(r.analytic_total),
        opt_field(r.mc_variance),
        opt_field(r.mc_bias),
        opt_field(r.mc_total),
        opt_field(r.mc_variance_stderr),
        opt_field(r.mc_bias_stderr),
        opt_field(r.mc_total_stderr),
        r.mc_trials ? std::to_string(*r.mc_trials) : std::string(),
        r.n_star ? std::to_string(*r.n_star) : std::string(),
    };
    static_assert(std::size(fields) == 19);
    for (std::size_t i = 0; i < std::size(fields); ++i) out << (i ? "," : "") << fields[i];
    out << '\n';
  }
}

void write_json(std::ostream& out, const SweepSpec& spec, const std::vector<ResultRow>& rows) {
  using nlohmann::json;
  json config = json::object();
  for (const auto& [k, v] : sweep_to_keys(spec)) config[k] = v;

  json body = json::array();
  for (const ResultRow& r : rows) {
    body.push_back({
        {"axis", r.axis},
        {"value", r.value},
        {"regime", r.regime},
        {"seed", r.seed},
        {"m", r.m},
        {"n", r.n},
        {"d", r.d},
        {"variance_err", opt_json(r.analytic_variance)},
        {"bias_err", opt_json(r.analytic_bias)},
        {"irreducible", r.irreducible},
        {"total", opt_json(r.analytic_total)},
        {"mc_variance_err", opt_json(r.mc_variance)},
        {"mc_bias_err", opt_json(r.mc_bias)},
        {"mc_total", opt_json(r.mc_total)},
        {"mc_variance_stderr", opt_json(r.mc_variance_stderr)},
        {"mc_bias_stderr", opt_json(r.mc_bias_stderr)},
        {"mc_total_stderr", opt_json(r.mc_total_stderr)},
        {"mc_trials", opt_json(r.mc_trials)},
        {"n_star", opt_json(r.n_star)},
    });
  }

  const json doc = {
      {"tool", "raglsa"},
      {"version", RAGLSA_VERSION},
      {"seed", spec.base.seed},
      {"config", config},
      {"columns", result_columns()},
      {"rows", body},
  };
  out << doc.dump(2) << '\n';
}

}  // namespace raglsa
