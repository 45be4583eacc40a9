#include "raglsa/analytic_loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "raglsa/predictor.hpp"

namespace raglsa {

namespace {

struct Traces {
  double tr;      // tr(W)
  double tr_sq;   // tr(W^2)
  double tr_wtw;  // tr(W^T W)
};

Traces traces(const Matrix& W) {
  return {W.trace(), (W * W).trace(), W.squaredNorm()};
}

void require_nonneg(double x, const char* name) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument(std::string(name) + " must be finite and >= 0");
}

}  // namespace

Matrix assemble_bias_kernel(const Matrix& W, double linear, double trace_linear, const std::array<double, 6>& c) {
  if (W.rows() != W.cols()) throw std::invalid_argument("W must be square");
  const Eigen::Index d = W.rows();
  const Matrix I = Matrix::Identity(d, d);
  const Matrix Wt = W.transpose();
  const Matrix W2 = W * W;
  const auto t = traces(W);
  Matrix M = I - linear * (W + Wt) - trace_linear * t.tr * I;
  M += c[0] * (W2 + W2.transpose());
  M += c[1] * (W * Wt);
  M += c[2] * (Wt * W);
  M += c[3] * t.tr * (W + Wt);
  M += (c[4] * (t.tr * t.tr + t.tr_sq) + c[5] * t.tr_wtw) * I;
  return M;
}

double variance_error_general(const WeightMatrix& W, std::size_t m, std::size_t n, double delta2, double sigma2,
                              double sigma2_rag) {
  require_nonneg(delta2, "delta2");
  require_nonneg(sigma2, "sigma2");
  require_nonneg(sigma2_rag, "sigma2_rag");
  const auto t = traces(W.entries());
  const double mm = static_cast<double>(m);
  const double nn = static_cast<double>(n);
  return (mm * sigma2 + (1.0 + delta2) * nn * sigma2_rag) * t.tr_wtw + nn * sigma2_rag * t.tr_sq +
         nn * sigma2_rag * t.tr * t.tr;
}

BiasKernel bias_kernel_uniform(const WeightMatrix& W, std::size_t m_count, std::size_t n_count, double delta2) {
  require_nonneg(delta2, "delta2");
  const double m = static_cast<double>(m_count);
  const double n = static_cast<double>(n_count);
  const double dl = delta2;
  const double dl2 = delta2 * delta2;

  BiasKernel k;
  k.m = m_count;
  k.n = n_count;
  k.s_delta = n * dl;
  k.S_delta = n * dl2;
  k.linear = n * dl + 2.0 * n + m;
  k.trace_linear = 2.0 * n;
  k.c[0] = n * n * (2.0 + dl) + n * (m + dl);
  k.c[1] = 2.0 * n * (n + dl);
  k.c[2] = m * m + m + m * n * (2.0 + 2.0 * dl) + n * n * (2.0 + 2.0 * dl + dl2) + n * (2.0 * dl + dl2);
  k.c[3] = k.c[0];
  k.c[4] = n * n + n * dl;
  k.c[5] = m + n * n + n * (2.0 * dl + dl2);
  k.M = assemble_bias_kernel(W.entries(), k.linear, k.trace_linear, k.c);
  return k;
}

BiasKernel bias_kernel_nonuniform(const WeightMatrix& W, std::size_t m_count, const DeltaSchedule& schedule) {
  if ((schedule.values.array() < 0.0).any()) throw std::invalid_argument("delta schedule must be >= 0");
  const double m = static_cast<double>(m_count);
  const double n = static_cast<double>(schedule.size());
  const double s = schedule.sum();
  const double S = schedule.sum_squares();

  // Same-index terms contribute s and S directly; cross terms i != j contribute
  // sum_{i != j} delta_i^2 = (n - 1) s and sum_{i != j} delta_i^2 delta_j^2 = s^2 - S.
  BiasKernel k;
  k.m = m_count;
  k.n = schedule.size();
  k.s_delta = s;
  k.S_delta = S;
  k.linear = m + 2.0 * n + s;
  k.trace_linear = 2.0 * n;
  k.c[0] = n * m + 2.0 * n * n + (n + 1.0) * s;
  k.c[1] = 2.0 * n * n + 2.0 * s;
  k.c[2] = m * m + m + m * (2.0 * n + 2.0 * s) + 2.0 * n * n + (2.0 * n + 2.0) * s + 2.0 * S + (s * s - S);
  k.c[3] = k.c[0];
  k.c[4] = n * n + s;
  k.c[5] = m + n * n + 2.0 * s + S;
  k.M = assemble_bias_kernel(W.entries(), k.linear, k.trace_linear, k.c);
  return k;
}

LossBreakdown population_loss_uniform(const WeightMatrix& W, const ExperimentConfig& config) {
  validate(config);
  const auto* u = std::get_if<UniformNoise>(&config.regime);
  if (!u) throw std::invalid_argument("population_loss_uniform needs the uniform noise regime");
  if (W.dim() != config.d) throw std::invalid_argument("W dimension does not match d");
  const double var = variance_error_general(W, config.m, config.n, u->delta2, config.sigma2, u->sigma2_rag);
  const double bias = bias_kernel_uniform(W, config.m, config.n, u->delta2).bias(config.beta.beta);
  return LossBreakdown::analytic(var, bias, config.sigma2);
}

LossBreakdown isotropic_loss(std::size_t m_count, std::size_t n_count, std::size_t d_count, double delta2,
                             double sigma2, double sigma2_rag, double beta_norm2) {
  if (m_count == 0) throw std::invalid_argument("isotropic loss needs m >= 1");
  if (d_count == 0) throw std::invalid_argument("d must be >= 1");
  require_nonneg(delta2, "delta2");
  require_nonneg(sigma2, "sigma2");
  require_nonneg(sigma2_rag, "sigma2_rag");
  require_nonneg(beta_norm2, "beta_norm2");
  const double m = static_cast<double>(m_count);
  const double n = static_cast<double>(n_count);
  const double d = static_cast<double>(d_count);
  const double dl = delta2;
  const double dl2 = delta2 * delta2;
  const double denom = (m + d + 1.0) * (m + n);
  const double denom2 = denom * denom;

  const double variance = m * m * m * d * sigma2 / denom2 + d * m * m * n * (2.0 + dl + d) * sigma2_rag / denom2;

  const double P = 6.0 * n * n + 4.0 * n * dl + m * m + m + (4.0 + 2.0 * dl) * m * n +
                   n * n * (2.0 + 4.0 * dl + dl2) + n * (2.0 * dl + dl2) + 2.0 * d * n * n * (2.0 + dl) +
                   2.0 * d * n * (m + dl) + d * (d + 1.0) * (n * n + n * dl) + d * m + d * n * n +
                   d * n * (2.0 * dl + dl2);
  const double bias =
      beta_norm2 * (1.0 - 2.0 * m * (n * dl + 2.0 * n + m + n * d) / denom + P * m * m / denom2);
  return LossBreakdown::analytic(variance, bias, sigma2);
}

double isotropic_bias_limit(std::size_t m_count, std::size_t d_count, double delta2, double beta_norm2) {
  const double m = static_cast<double>(m_count);
  const double d = static_cast<double>(d_count);
  const double dl = delta2;
  const double a = m / (m + d + 1.0);
  // Leading n^2 coefficient of P and leading n coefficient of the linear term.
  const double p_nn = 8.0 + 4.0 * dl + dl * dl + 2.0 * d * (2.0 + dl) + d * (d + 1.0) + d;
  return beta_norm2 * (1.0 - 2.0 * a * (2.0 + dl + d) + a * a * p_nn);
}

OptimalNCoefficients optimal_n_coefficients(std::size_t m_count, std::size_t d_count, double sigma2,
                                            double sigma2_rag, double beta_norm2) {
  const double m = static_cast<double>(m_count);
  const double d = static_cast<double>(d_count);
  OptimalNCoefficients k;
  k.omega1 = d;
  k.omega2 = d * d;
  k.tau30 = d;
  k.tau22 = d * d;
  k.tau21 = -2.0 * d * d;
  k.tau12 = -2.0 * d * d;
  k.tau2 = d * d;
  k.A = m * m * m * k.omega1 * sigma2 + beta_norm2 * k.tau30 * m * m * m + beta_norm2 * k.tau2 * m * m;
  k.B = m * m * (k.omega2 * sigma2_rag + beta_norm2 * k.tau21);
  k.C = beta_norm2 * (k.tau22 * m * m + k.tau12 * m + k.tau2);
  return k;
}

OptimalN optimal_n(std::size_t m, std::size_t d, double sigma2, double sigma2_rag, double beta_norm2, double delta2,
                   std::size_t grid_limit) {
  if (m == 0) throw std::invalid_argument("optimal_n needs m >= 1");
  require_nonneg(sigma2, "sigma2");
  require_nonneg(sigma2_rag, "sigma2_rag");
  require_nonneg(beta_norm2, "beta_norm2");
  auto loss = [&](std::size_t n) { return isotropic_loss(m, n, d, delta2, sigma2, sigma2_rag, beta_norm2).total; };

  OptimalN out;
  out.coefficients = optimal_n_coefficients(m, d, sigma2, sigma2_rag, beta_norm2);
  const auto& k = out.coefficients;
  const double mm = static_cast<double>(m);
  const double denom = k.B - 2.0 * k.C * mm;
  const double scale = std::abs(k.B) + std::abs(2.0 * k.C * mm);

  std::size_t best = 0;
  if (!(std::abs(denom) > 1e-12 * scale)) {
    out.real_root = std::numeric_limits<double>::quiet_NaN();
    out.grid_fallback = true;
    double best_loss = loss(0);
    for (std::size_t n = 1; n <= grid_limit; ++n) {
      const double l = loss(n);
      if (l < best_loss) {
        best_loss = l;
        best = n;
      }
    }
    out.seed = best;
  } else {
    out.real_root = (k.B * mm - 2.0 * k.A) / denom;
    const double clamped = std::clamp(out.real_root, 0.0, static_cast<double>(grid_limit));
    const auto lo = static_cast<std::size_t>(std::floor(clamped));
    const auto hi = static_cast<std::size_t>(std::ceil(clamped));
    out.seed = loss(hi) < loss(lo) ? hi : lo;

    // Window of +-2 around the seed, then walk downhill if the minimum sits on the edge.
    std::size_t left = out.seed >= 2 ? out.seed - 2 : 0;
    std::size_t right = out.seed + 2;
    best = left;
    double best_loss = loss(left);
    for (std::size_t n = left + 1; n <= right; ++n) {
      const double l = loss(n);
      if (l < best_loss) {
        best_loss = l;
        best = n;
      }
    }
    while (best > 0 && loss(best - 1) <= best_loss) {
      --best;
      best_loss = loss(best);
    }
    while (loss(best + 1) < best_loss) {
      ++best;
      best_loss = loss(best);
    }
  }

  out.n_star = best;
  out.loss_at_zero = loss(0);
  out.loss_at_star = loss(best);
  out.improvement = out.loss_at_zero - out.loss_at_star;
  return out;
}

double variance_error_schedule(const WeightMatrix& W, std::size_t m, double sigma2, const DeltaSchedule& schedule,
                               const Vector& rag_variances) {
  require_nonneg(sigma2, "sigma2");
  if (rag_variances.size() != schedule.values.size())
    throw std::invalid_argument("one RAG noise variance per schedule entry is required");
  const auto t = traces(W.entries());
  const double per_index_const = t.tr_wtw + t.tr_sq + t.tr * t.tr;
  double rag = 0.0;
  for (Eigen::Index i = 0; i < rag_variances.size(); ++i)
    rag += rag_variances(i) * (per_index_const + schedule.values(i) * t.tr_wtw);
  return static_cast<double>(m) * sigma2 * t.tr_wtw + rag;
}

double dpn_variance_error(const WeightMatrix& W, std::size_t m, double sigma2, double gamma1,
                          const DeltaSchedule& schedule) {
  require_nonneg(gamma1, "gamma1");
  return variance_error_schedule(W, m, sigma2, schedule, gamma1 * sigma2 * schedule.values);
}

double mixture_variance_error(const WeightMatrix& W, std::size_t m, double sigma2, double c_s, double c_l,
                              double q_tilde, const DeltaSchedule& schedule) {
  require_nonneg(c_s, "c_s");
  require_nonneg(q_tilde, "q_tilde");
  if (!(c_l >= c_s)) throw std::invalid_argument("c_l must be >= c_s");
  Vector v(schedule.values.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double p = std::pow(1.0 + schedule.values(i), -q_tilde);
    v(i) = p * c_s * sigma2 + (1.0 - p) * c_l * sigma2;
  }
  return variance_error_schedule(W, m, sigma2, schedule, v);
}

LossBreakdown regime_loss(const WeightMatrix& W, const ExperimentConfig& config) {
  validate(config);
  if (W.dim() != config.d) throw std::invalid_argument("W dimension does not match d");
  if (std::holds_alternative<UniformNoise>(config.regime)) return population_loss_uniform(W, config);

  const DeltaSchedule schedule = delta_schedule(config.regime, config.n);
  const double bias = bias_kernel_nonuniform(W, config.m, schedule).bias(config.beta.beta);
  double variance = 0.0;
  if (const auto* p = std::get_if<DistanceProportionalNoise>(&config.regime)) {
    variance = dpn_variance_error(W, config.m, config.sigma2, p->gamma1, schedule);
  } else {
    const auto& x = std::get<MixtureNoise>(config.regime);
    variance = mixture_variance_error(W, config.m, config.sigma2, x.c_s, x.c_l, x.q_tilde, schedule);
  }
  return LossBreakdown::analytic(variance, bias, config.sigma2);
}

}  // namespace raglsa
