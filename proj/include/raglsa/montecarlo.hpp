// Monte Carlo estimates of the test-time loss and its bias/variance parts.
#pragma once

#include <cstddef>
#include <vector>

#include "raglsa/analytic_loss.hpp"
#include "raglsa/config.hpp"

namespace raglsa {

enum class McComponent { Total, Variance, Bias, Cross };

struct McEstimate {
  double mean = 0.0;
  /// sample-std / sqrt(trials); NaN when trials < 2.
  double standard_error = 0.0;
  std::size_t trials = 0;
  McComponent component = McComponent::Total;
};

struct ComponentEstimates {
  McEstimate total;     // (y_q - y_hat)^2
  McEstimate variance;  // (x_q^T W X^T eps)^2
  McEstimate bias;      // (x_q^T (I - W G) beta)^2
  McEstimate cross;     // -2 * bias_term * variance_term
};

struct McOptions {
  std::size_t workers = 1;
  /// Trials per reduction block. Part of the reproducibility contract: the
  /// same seed and block size give bit-identical results for any worker count.
  std::size_t block_size = 4096;
};

/// Trial t draws its prompt from derive_stream(config.seed, t), t < config.trials.
ComponentEstimates estimate_components(const WeightMatrix& W, const ExperimentConfig& config,
                                       const McOptions& options = {});

/// Monte Carlo LossBreakdown; irreducible is the configured sigma^2.
LossBreakdown estimate_loss(const WeightMatrix& W, const ExperimentConfig& config, const McOptions& options = {});

enum class ArgminPath { Analytic, MonteCarlo };

/// Loss at W = optimal_pretrained_weight(m, n, d) for each n in the grid;
/// returns the argmin, ties toward smaller n.
std::size_t empirical_argmin_n(const ExperimentConfig& base, const std::vector<std::size_t>& n_grid, ArgminPath path,
                               const McOptions& options = {});

}  // namespace raglsa
