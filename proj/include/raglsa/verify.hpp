// Oracle battery behind `raglsa verify`, plus the optimal-n and moments-check reports.
#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "raglsa/analytic_loss.hpp"
#include "raglsa/config.hpp"
#include "raglsa/moments.hpp"

namespace raglsa {

enum class VerifyGrid { Default, Config };

/// Extra keys on top of the experiment keys:
///   exact_tol     absolute/relative tolerance of exact identities   (1e-9)
///   mc_k          Monte Carlo acceptance band in standard errors    (4)
///   moment_draws  random (A, B) pairs per d for the sixth moment    (20)
///   grid          default | config                                  (default)
///   workers       Monte Carlo worker threads                        (1)
struct VerifyConfig {
  ExperimentConfig base;
  double exact_tol = 1e-9;
  double mc_k = 4.0;
  std::size_t moment_draws = 20;
  VerifyGrid grid = VerifyGrid::Default;
  std::size_t workers = 1;
};

bool is_verify_key(std::string_view key);
/// Overlays experiment and verify keys; throws ConfigError on unknown keys.
VerifyConfig apply_verify_keys(VerifyConfig base, const KeyValues& values);
void validate(const VerifyConfig& config);

/// Twelve configs over d in {1,2,4}, m in {8,32}, n in {0,4,16}, delta2 in {0,0.1}
/// with sigma2 = 0.25, sigma2_rag = 0.1, beta = ones(d). Every (d, m) pair
/// appears twice and every (n, delta2) pair twice.
std::vector<ExperimentConfig> verification_grid(std::uint64_t seed, std::size_t trials);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool passed() const;
};

/// Sixth-moment closed form vs pairing oracle, analytic vs Monte Carlo on the
/// grid, the n = 0 reduction and isotropic vs general consistency.
VerifyReport run_verify(const VerifyConfig& config);
void print_report(std::ostream& out, const VerifyReport& report);

struct OptimalNReport {
  OptimalN solution;
  std::size_t grid_max = 0;
  std::size_t grid_argmin = 0;
  bool confirmed = false;
};

/// Needs the uniform regime and m >= 1. Confirms against a brute-force scan of
/// the exact loss over n = 0..grid_max.
OptimalNReport optimal_n_report(const ExperimentConfig& config);
void print_optimal_n(std::ostream& out, const ExperimentConfig& config, const OptimalNReport& report);

struct MomentCheckResult {
  MomentKernel kernel = MomentKernel::FourthVec;
  std::size_t d = 0;
  Matrix closed_form;
  Matrix estimate;
  Matrix standard_error;
  /// Largest |estimate - closed_form| / stderr over entries with nonzero stderr.
  double max_z = 0.0;
  /// Sixth kernel only: max entrywise gap between closed form and pairing oracle.
  double oracle_gap = 0.0;
  bool passed = false;
};

/// A (and B) have N(0, 1) entries drawn from `seed`; the estimate uses base.trials
/// samples. Passes when max_z <= mc_k and, for the sixth kernel, oracle_gap <= exact_tol.
MomentCheckResult moments_check(MomentKernel kernel, const VerifyConfig& config);
void print_moment_check(std::ostream& out, const MomentCheckResult& result);

}  // namespace raglsa
