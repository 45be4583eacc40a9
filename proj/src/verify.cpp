#include "raglsa/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "raglsa/montecarlo.hpp"
#include "raglsa/predictor.hpp"

namespace raglsa {

namespace {

constexpr std::uint32_t kMatrixDomain = 2;

Matrix random_matrix(std::size_t d, RandomStream& stream) {
  Matrix A(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  stream.fill_normal(A);
  return A;
}

std::string describe(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "d=" << c.d << " m=" << c.m << " n=" << c.n << " delta2=" << format_double(std::get<UniformNoise>(c.regime).delta2);
  return os.str();
}

double rel_gap(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// |a - b| in units of stderr; an exact match with zero stderr counts as 0.
double z_score(double estimate, double target, double se) {
  const double gap = std::abs(estimate - target);
  if (gap == 0.0) return 0.0;
  return se > 0.0 ? gap / se : std::numeric_limits<double>::infinity();
}

CheckResult check_moments(const VerifyConfig& cfg) {
  CheckResult r{"moment-identities", true, ""};
  const std::size_t matchings = perfect_matchings(6).size();
  double worst = 0.0;
  RandomStream stream(cfg.base.seed, 0, kMatrixDomain);
  for (std::size_t d = 1; d <= 5; ++d) {
    for (std::size_t k = 0; k < cfg.moment_draws; ++k) {
      const Matrix A = random_matrix(d, stream);
      const Matrix B = random_matrix(d, stream);
      worst = std::max(worst, (sixth_moment(A, B) - isserlis_sixth_oracle(A, B)).cwiseAbs().maxCoeff());
    }
  }
  r.passed = matchings == 15 && worst <= cfg.exact_tol;
  std::ostringstream os;
  os << "matchings=" << matchings << " max_sixth_gap=" << format_double(worst) << " tol=" << format_double(cfg.exact_tol);
  r.detail = os.str();
  return r;
}

CheckResult check_mc_grid(const VerifyConfig& cfg, const std::vector<ExperimentConfig>& grid) {
  CheckResult r{"analytic-vs-montecarlo", true, ""};
  double worst = 0.0;
  std::string worst_at;
  for (const ExperimentConfig& c : grid) {
    const WeightMatrix W = optimal_pretrained_weight(c.m, c.n, c.d);
    const LossBreakdown a = regime_loss(W, c);
    const ComponentEstimates e = estimate_components(W, c, McOptions{cfg.workers});
    const double zs[] = {z_score(e.variance.mean, a.variance, e.variance.standard_error),
                         z_score(e.bias.mean, a.bias, e.bias.standard_error),
                         z_score(e.total.mean, a.total, e.total.standard_error)};
    for (const double z : zs) {
      if (z > worst) {
        worst = z;
        worst_at = describe(c);
      }
    }
  }
  r.passed = worst <= cfg.mc_k;
  std::ostringstream os;
  os << "configs=" << grid.size() << " trials=" << (grid.empty() ? 0 : grid.front().trials)
     << " max_z=" << format_double(worst) << " k=" << format_double(cfg.mc_k);
  if (!worst_at.empty()) os << " worst_at=[" << worst_at << "]";
  r.detail = os.str();
  return r;
}

CheckResult check_icl_reduction(const VerifyConfig& cfg, const std::vector<ExperimentConfig>& grid) {
  CheckResult r{"icl-reduction", true, ""};
  double worst = 0.0;
  for (const ExperimentConfig& c : grid) {
    const auto& u = std::get<UniformNoise>(c.regime);
    const double m = static_cast<double>(c.m);
    const double d = static_cast<double>(c.d);
    const double w = 1.0 / (m + d + 1.0);
    const BiasKernel K = bias_kernel_uniform(WeightMatrix::isotropic(c.d, w), c.m, 0, u.delta2);
    const double coeff_gap = std::max({std::abs(K.c[0]), std::abs(K.c[1]), std::abs(K.c[3]), std::abs(K.c[4]),
                                       std::abs(K.c[2] - (m * m + m)), std::abs(K.c[5] - m)});
    const double scalar = (1.0 - 2.0 * m * w + (m * m + m + m * d) * w * w) * c.beta.norm2();
    worst = std::max({worst, coeff_gap, rel_gap(K.bias(c.beta.beta), scalar)});
  }
  r.passed = worst <= cfg.exact_tol;
  r.detail = "max_gap=" + format_double(worst) + " tol=" + format_double(cfg.exact_tol);
  return r;
}

CheckResult check_isotropic(const VerifyConfig& cfg, const std::vector<ExperimentConfig>& grid) {
  CheckResult r{"isotropic-vs-general", true, ""};
  double worst = 0.0;
  for (const ExperimentConfig& c : grid) {
    const auto& u = std::get<UniformNoise>(c.regime);
    const LossBreakdown iso = isotropic_loss(c.m, c.n, c.d, u.delta2, c.sigma2, u.sigma2_rag, c.beta.norm2());
    // A general (non-flagged) matrix forces the full trace path.
    const WeightMatrix W = WeightMatrix::general(optimal_pretrained_weight(c.m, c.n, c.d).entries());
    const LossBreakdown gen = population_loss_uniform(W, c);
    worst = std::max({worst, rel_gap(iso.variance, gen.variance), rel_gap(iso.bias, gen.bias),
                      rel_gap(iso.total, gen.total)});
  }
  r.passed = worst <= cfg.exact_tol;
  r.detail = "max_rel_gap=" + format_double(worst) + " tol=" + format_double(cfg.exact_tol);
  return r;
}

}  // namespace

bool is_verify_key(std::string_view key) {
  return key == "exact_tol" || key == "mc_k" || key == "moment_draws" || key == "grid" || key == "workers";
}

VerifyConfig apply_verify_keys(VerifyConfig c, const KeyValues& kv) {
  for (const auto& [k, v] : kv)
    if (!is_config_key(k) && !is_verify_key(k)) throw ConfigError("unknown key '" + k + "'");
  c.base = apply_config_keys(c.base, kv);
  if (auto it = kv.find("exact_tol"); it != kv.end()) c.exact_tol = parse_double(it->second, "exact_tol");
  if (auto it = kv.find("mc_k"); it != kv.end()) c.mc_k = parse_double(it->second, "mc_k");
  if (auto it = kv.find("moment_draws"); it != kv.end())
    c.moment_draws = static_cast<std::size_t>(parse_unsigned(it->second, "moment_draws"));
  if (auto it = kv.find("workers"); it != kv.end())
    c.workers = static_cast<std::size_t>(parse_unsigned(it->second, "workers"));
  if (auto it = kv.find("grid"); it != kv.end()) {
    if (it->second == "default") c.grid = VerifyGrid::Default;
    else if (it->second == "config") c.grid = VerifyGrid::Config;
    else throw ConfigError("grid must be default or config");
  }
  return c;
}

void validate(const VerifyConfig& c) {
  validate(c.base);
  if (!(c.exact_tol > 0.0)) throw ConfigError("exact_tol must be > 0");
  if (!(c.mc_k > 0.0)) throw ConfigError("mc_k must be > 0");
  if (c.workers == 0) throw ConfigError("workers must be >= 1");
  if (c.base.trials < 2) throw ConfigError("verification needs trials >= 2");
  if (c.grid == VerifyGrid::Config) {
    if (!std::holds_alternative<UniformNoise>(c.base.regime)) throw ConfigError("grid=config needs the uniform regime");
    if (c.base.m == 0) throw ConfigError("grid=config needs m >= 1");
  }
}

std::vector<ExperimentConfig> verification_grid(std::uint64_t seed, std::size_t trials) {
  const std::pair<std::size_t, std::size_t> dm[] = {{1, 8}, {1, 32}, {2, 8}, {2, 32}, {4, 8}, {4, 32}};
  const std::pair<std::size_t, double> nd[] = {{0, 0.0}, {0, 0.1}, {4, 0.0}, {4, 0.1}, {16, 0.0}, {16, 0.1}};
  std::vector<ExperimentConfig> grid;
  for (std::size_t k = 0; k < 6; ++k) {
    for (const std::size_t j : {(2 * k) % 6, (2 * k + 3) % 6}) {
      ExperimentConfig c;
      c.d = dm[k].first;
      c.m = dm[k].second;
      c.n = nd[j].first;
      c.sigma2 = 0.25;
      c.regime = UniformNoise{nd[j].second, 0.1};
      c.beta = TaskVector::ones(c.d);
      c.seed = seed;
      c.trials = trials;
      grid.push_back(c);
    }
  }
  return grid;
}

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

VerifyReport run_verify(const VerifyConfig& cfg) {
  validate(cfg);
  const std::vector<ExperimentConfig> grid =
      cfg.grid == VerifyGrid::Default ? verification_grid(cfg.base.seed, cfg.base.trials)
                                      : std::vector<ExperimentConfig>{cfg.base};
  VerifyReport report;
  report.checks.push_back(check_moments(cfg));
  report.checks.push_back(check_mc_grid(cfg, grid));
  report.checks.push_back(check_icl_reduction(cfg, grid));
  report.checks.push_back(check_isotropic(cfg, grid));
  return report;
}

void print_report(std::ostream& out, const VerifyReport& report) {
  for (const CheckResult& c : report.checks)
    out << (c.passed ? "PASS " : "FAIL ") << c.name << "  " << c.detail << '\n';
  out << (report.passed() ? "all checks passed" : "some checks FAILED") << '\n';
}

OptimalNReport optimal_n_report(const ExperimentConfig& config) {
  validate(config);
  const auto* u = std::get_if<UniformNoise>(&config.regime);
  if (!u) throw ConfigError("optimal-n needs the uniform regime");
  if (config.m == 0) throw ConfigError("optimal-n needs m >= 1");

  OptimalNReport r;
  r.solution = optimal_n(config.m, config.d, config.sigma2, u->sigma2_rag, config.beta.norm2(), u->delta2);
  r.grid_max = std::max<std::size_t>(512, 2 * r.solution.n_star + 64);
  std::vector<std::size_t> grid(r.grid_max + 1);
  for (std::size_t i = 0; i <= r.grid_max; ++i) grid[i] = i;
  r.grid_argmin = empirical_argmin_n(config, grid, ArgminPath::Analytic);
  r.confirmed = r.grid_argmin == r.solution.n_star;
  return r;
}

void print_optimal_n(std::ostream& out, const ExperimentConfig& config, const OptimalNReport& r) {
  const auto& s = r.solution;
  out << "m: " << config.m << '\n'
      << "d: " << config.d << '\n'
      << "sigma2: " << format_double(config.sigma2) << '\n'
      << "sigma2_rag: " << format_double(std::get<UniformNoise>(config.regime).sigma2_rag) << '\n'
      << "delta2: " << format_double(std::get<UniformNoise>(config.regime).delta2) << '\n'
      << "beta_norm2: " << format_double(config.beta.norm2()) << '\n'
      << "stationary_point: " << (std::isfinite(s.real_root) ? format_double(s.real_root) : "none") << '\n'
      << "closed_form_seed: " << s.seed << '\n'
      << "n_star: " << s.n_star << '\n'
      << "loss_at_0: " << format_double(s.loss_at_zero) << '\n'
      << "loss_at_n_star: " << format_double(s.loss_at_star) << '\n'
      << "improvement: " << format_double(s.improvement) << '\n'
      << "grid_fallback: " << (s.grid_fallback ? "yes" : "no") << '\n'
      << "grid_search: argmin " << r.grid_argmin << " over n=0.." << r.grid_max << ' '
      << (r.confirmed ? "(confirmed)" : "(MISMATCH)") << '\n';
}

MomentCheckResult moments_check(MomentKernel kernel, const VerifyConfig& cfg) {
  validate(cfg);
  MomentCheckResult res;
  res.kernel = kernel;
  res.d = cfg.base.d;

  RandomStream mats(cfg.base.seed, 0, kMatrixDomain);
  MomentParams p;
  p.A = random_matrix(res.d, mats);
  p.B = random_matrix(res.d, mats);
  p.m = std::max<std::size_t>(cfg.base.m, 1);
  if (const auto* u = std::get_if<UniformNoise>(&cfg.base.regime)) p.delta2 = u->delta2;

  const MomentResult cf = closed_form_moment(kernel, p);
  RandomStream draws = derive_stream(cfg.base.seed, 0);
  const MomentResult mc = mc_moment(kernel, p, cfg.base.trials, draws);
  res.closed_form = cf.value;
  res.estimate = mc.value;
  res.standard_error = *mc.standard_error;

  for (Eigen::Index i = 0; i < cf.value.size(); ++i)
    res.max_z = std::max(res.max_z, z_score(mc.value(i), cf.value(i), res.standard_error(i)));
  bool oracle_ok = true;
  if (kernel == MomentKernel::Sixth && res.d <= kMaxOracleDim) {
    res.oracle_gap = (cf.value - isserlis_sixth_oracle(p.A, p.B)).cwiseAbs().maxCoeff();
    oracle_ok = res.oracle_gap <= cfg.exact_tol;
  }
  res.passed = res.max_z <= cfg.mc_k && oracle_ok;
  return res;
}

void print_moment_check(std::ostream& out, const MomentCheckResult& r) {
  const Eigen::IOFormat fmt(Eigen::FullPrecision, 0, " ", "\n", "  ");
  out << "kernel: " << moment_kernel_name(r.kernel) << '\n' << "d: " << r.d << '\n';
  out << "closed_form:\n" << r.closed_form.format(fmt) << '\n';
  out << "monte_carlo:\n" << r.estimate.format(fmt) << '\n';
  out << "stderr:\n" << r.standard_error.format(fmt) << '\n';
  out << "max_z: " << format_double(r.max_z) << '\n';
  if (r.kernel == MomentKernel::Sixth) out << "oracle_gap: " << format_double(r.oracle_gap) << '\n';
  out << (r.passed ? "PASS" : "FAIL") << '\n';
}

}  // namespace raglsa
