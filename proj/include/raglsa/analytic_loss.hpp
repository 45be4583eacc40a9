// Exact population loss of the linear self-attention predictor on
// retrieval-augmented prompts: bias/variance split, isotropic specialization,
// non-uniform retrieval noise and the optimal number of retrieved examples.
#pragma once

#include <array>
#include <cstddef>
#include <optional>

#include "raglsa/config.hpp"
#include "raglsa/datagen.hpp"

namespace raglsa {

enum class LossSource { Analytic, MonteCarlo };

struct LossStderr {
  double variance = 0.0;
  double bias = 0.0;
  double total = 0.0;
};

/// total = variance + bias + irreducible (exactly for analytic results).
struct LossBreakdown {
  double variance = 0.0;
  double bias = 0.0;
  double irreducible = 0.0;
  double total = 0.0;
  LossSource source = LossSource::Analytic;
  std::optional<LossStderr> standard_error;

  static LossBreakdown analytic(double variance, double bias, double irreducible) {
    return {variance, bias, irreducible, variance + bias + irreducible, LossSource::Analytic, std::nullopt};
  }
};

/// Bias kernel M with err_bias = beta^T M beta, where
///   M = I - linear (W + W^T) - trace_linear tr(W) I
///       + c[0] (W^2 + (W^2)^T) + c[1] W W^T + c[2] W^T W
///       + c[3] tr(W) (W + W^T) + c[4] (tr(W)^2 + tr(W^2)) I + c[5] tr(W^T W) I.
struct BiasKernel {
  Matrix M;
  std::array<double, 6> c{};
  double linear = 0.0;
  double trace_linear = 0.0;
  std::size_t m = 0;
  std::size_t n = 0;
  double s_delta = 0.0;  // sum of delta_i^2
  double S_delta = 0.0;  // sum of delta_i^4

  double bias(const Vector& beta) const { return beta.dot(M * beta); }
};

/// Assembles M from its coefficients; exposed for tests of the coefficient algebra.
Matrix assemble_bias_kernel(const Matrix& W, double linear, double trace_linear, const std::array<double, 6>& c);

// ---- uniform retrieval noise -------------------------------------------------

/// [m s2 + (1 + delta2) n s2_rag] tr(W^T W) + n s2_rag tr(W^2) + n s2_rag tr(W)^2
double variance_error_general(const WeightMatrix& W, std::size_t m, std::size_t n, double delta2, double sigma2,
                              double sigma2_rag);

BiasKernel bias_kernel_uniform(const WeightMatrix& W, std::size_t m, std::size_t n, double delta2);

/// Requires a uniform-regime config.
LossBreakdown population_loss_uniform(const WeightMatrix& W, const ExperimentConfig& config);

/// Closed form at W = optimal_pretrained_weight(m, n, d); needs m >= 1.
LossBreakdown isotropic_loss(std::size_t m, std::size_t n, std::size_t d, double delta2, double sigma2,
                             double sigma2_rag, double beta_norm2);

/// lim_{n -> inf} of the isotropic bias error at fixed m.
double isotropic_bias_limit(std::size_t m, std::size_t d, double delta2, double beta_norm2);

// ---- optimal number of retrieved examples ----------------------------------

/// Coefficients of the reduced loss L(n) = (A + B n + C n^2) / (m + n)^2.
struct OptimalNCoefficients {
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  double omega1 = 0.0;
  double omega2 = 0.0;
  double tau30 = 0.0;
  double tau22 = 0.0;
  double tau21 = 0.0;
  double tau12 = 0.0;
  double tau2 = 0.0;

  double reduced_loss(double m, double n) const { return (A + B * n + C * n * n) / ((m + n) * (m + n)); }
};

OptimalNCoefficients optimal_n_coefficients(std::size_t m, std::size_t d, double sigma2, double sigma2_rag,
                                            double beta_norm2);

struct OptimalN {
  std::size_t n_star = 0;
  /// Stationary point (B m - 2 A) / (B - 2 C m) of the reduced loss; NaN when degenerate.
  double real_root = 0.0;
  /// real_root clamped to [0, inf) and rounded to the better neighbouring integer.
  std::size_t seed = 0;
  OptimalNCoefficients coefficients;
  double loss_at_zero = 0.0;
  double loss_at_star = 0.0;
  /// loss_at_zero - loss_at_star under the exact isotropic loss.
  double improvement = 0.0;
  /// Set when B - 2 C m vanished and the answer came from a grid search.
  bool grid_fallback = false;
};

/// Integer minimizer of the exact isotropic loss over n >= 0, seeded by the
/// stationary point of the reduced loss and refined by local integer search.
OptimalN optimal_n(std::size_t m, std::size_t d, double sigma2, double sigma2_rag, double beta_norm2,
                   double delta2 = 0.0, std::size_t grid_limit = 4096);

// ---- non-uniform retrieval noise -------------------------------------------

/// m s2 tr(W^T W) + sum_i v_i [(1 + delta_i^2) tr(W^T W) + tr(W^2) + tr(W)^2]
/// for per-example expected noise variances v_i.
double variance_error_schedule(const WeightMatrix& W, std::size_t m, double sigma2, const DeltaSchedule& schedule,
                               const Vector& rag_variances);

/// v_i = gamma1 * sigma2 * delta_i^2.
double dpn_variance_error(const WeightMatrix& W, std::size_t m, double sigma2, double gamma1,
                          const DeltaSchedule& schedule);

/// v_i = p_i c_s sigma2 + (1 - p_i) c_l sigma2, p_i = (1 + delta_i^2)^(-q_tilde).
double mixture_variance_error(const WeightMatrix& W, std::size_t m, double sigma2, double c_s, double c_l,
                              double q_tilde, const DeltaSchedule& schedule);

/// Bias kernel for per-example offset variances; reduces to bias_kernel_uniform
/// on a constant schedule.
BiasKernel bias_kernel_nonuniform(const WeightMatrix& W, std::size_t m, const DeltaSchedule& schedule);

/// Dispatches on the config's noise regime.
LossBreakdown regime_loss(const WeightMatrix& W, const ExperimentConfig& config);

}  // namespace raglsa
