// raglsa: verification suites, parameter sweeps and the optimal-n solver.
//
// Exit codes: 0 success, 1 validation error, 2 check failure, 3 I/O error.
// Settings precedence: explicit flags > --set key=value > --config file > defaults.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "raglsa/config.hpp"
#include "raglsa/sweep.hpp"
#include "raglsa/verify.hpp"

namespace {

using raglsa::KeyValues;

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kCheckFailed = 2;
constexpr int kIoError = 3;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonFlags {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_trials = true, bool with_workers = true) {
  cmd->add_option("--config", f.config_path, "flat key=value config file");
  cmd->add_option("--set", f.sets, "override one key (key=value); repeatable");
  cmd->add_option("--seed", f.seed, "master seed");
  if (with_trials) cmd->add_option("--trials", f.trials, "Monte Carlo trials");
  if (with_workers) cmd->add_option("--workers", f.workers, "worker threads");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error while reading '" + path + "'");
  return ss.str();
}

// File, then --set, then explicit flags.
KeyValues resolve_keys(const CommonFlags& f, const KeyValues& flag_keys) {
  KeyValues kv;
  if (!f.config_path.empty()) kv = raglsa::parse_key_values(read_file(f.config_path));
  for (const std::string& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw raglsa::ConfigError("--set expects key=value, got '" + s + "'");
    const KeyValues one = raglsa::parse_key_values(s);
    for (const auto& [k, v] : one) kv[k] = v;
  }
  if (f.trials) kv["trials"] = std::to_string(*f.trials);
  if (f.seed) kv["seed"] = std::to_string(*f.seed);
  if (f.workers) kv["workers"] = std::to_string(*f.workers);
  for (const auto& [k, v] : flag_keys) kv[k] = v;
  return kv;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.close();
  if (!out) throw IoError("error while writing '" + path + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear self-attention with retrieval-augmented prompts: closed-form loss, Monte Carlo checks, sweeps"};
  app.set_version_flag("--version", RAGLSA_VERSION);
  app.require_subcommand(1);

  CommonFlags verify_flags;
  auto* verify = app.add_subcommand("verify", "run the oracle battery; nonzero exit on any failed check");
  add_common(verify, verify_flags);

  CommonFlags sweep_flags;
  std::string axis, values, out_path, format, mode;
  auto* sweep = app.add_subcommand("sweep", "evaluate the loss along one parameter axis");
  add_common(sweep, sweep_flags);
  sweep->add_option("--axis", axis, "n | m | delta2 | q | q_tilde | ratio");
  sweep->add_option("--values", values, "a:b, a:b:step or v1,v2,...");
  sweep->add_option("--out", out_path, "output file (default stdout)");
  sweep->add_option("--format", format, "csv | json");
  sweep->add_option("--mode", mode, "analytic | mc | both");

  CommonFlags opt_flags;
  auto* optn = app.add_subcommand("optimal-n", "optimal number of retrieved examples (uniform regime)");
  add_common(optn, opt_flags, false, false);

  CommonFlags mom_flags;
  std::string kernel = "sixth";
  auto* moments = app.add_subcommand("moments-check", "closed-form Gaussian moment vs Monte Carlo");
  add_common(moments, mom_flags, true, false);
  moments->add_option("--kernel", kernel,
                      "fourth_vec | fourth_design | scalar_fourth | mixed_rr_rr | mixed_rx_xr | mixed_xr_rx | "
                      "mixed_rx_rx | mixed_rr_xx | sixth | third");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*verify) {
      const auto cfg = raglsa::apply_verify_keys({}, resolve_keys(verify_flags, {}));
      const auto report = raglsa::run_verify(cfg);
      raglsa::print_report(std::cout, report);
      return report.passed() ? kOk : kCheckFailed;
    }

    if (*sweep) {
      KeyValues flags;
      if (!axis.empty()) flags["axis"] = axis;
      if (!values.empty()) flags["values"] = values;
      if (!out_path.empty()) flags["out"] = out_path;
      if (!format.empty()) flags["format"] = format;
      if (!mode.empty()) flags["mode"] = mode;
      const KeyValues kv = resolve_keys(sweep_flags, flags);
      if (!kv.count("values")) throw raglsa::ConfigError("sweep needs --values");
      const raglsa::SweepSpec spec = raglsa::apply_sweep_keys({}, kv);
      const auto rows = raglsa::run_sweep(spec);
      std::ostringstream text;
      if (spec.format == raglsa::OutputFormat::Csv) raglsa::write_csv(text, spec, rows);
      else raglsa::write_json(text, spec, rows);
      write_output(spec.out_path, text.str());
      return kOk;
    }

    if (*optn) {
      const KeyValues kv = resolve_keys(opt_flags, {});
      for (const auto& [k, v] : kv)
        if (!raglsa::is_config_key(k)) throw raglsa::ConfigError("unknown key '" + k + "'");
      const raglsa::ExperimentConfig cfg = raglsa::apply_config_keys({}, kv);
      const auto report = raglsa::optimal_n_report(cfg);
      raglsa::print_optimal_n(std::cout, cfg, report);
      return report.confirmed ? kOk : kCheckFailed;
    }

    if (*moments) {
      const auto cfg = raglsa::apply_verify_keys({}, resolve_keys(mom_flags, {}));
      const auto result = raglsa::moments_check(raglsa::parse_moment_kernel(kernel), cfg);
      raglsa::print_moment_check(std::cout, result);
      return result.passed ? kOk : kCheckFailed;
    }
  } catch (const IoError& e) {
    std::cerr << "raglsa: " << e.what() << '\n';
    return kIoError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "raglsa: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "raglsa: " << e.what() << '\n';
    return kInvalid;
  }
  return kInvalid;
}
