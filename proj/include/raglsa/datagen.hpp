// Prompt sampling for pretraining, test-time ICL and retrieval-augmented examples.
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "raglsa/config.hpp"

namespace raglsa {

/// Per-example offset variances delta_i^2, i = 1..n.
struct DeltaSchedule {
  Vector values;

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  /// s = sum_i delta_i^2
  double sum() const { return values.sum(); }
  /// S = sum_i (delta_i^2)^2
  double sum_squares() const { return values.squaredNorm(); }

  static DeltaSchedule constant(std::size_t n, double delta2);
  static DeltaSchedule power_law(std::size_t n, double gamma2, double q);
};

DeltaSchedule delta_schedule(const NoiseRegime& regime, std::size_t n);

/// Label-noise law of one retrieved example: N(0, var_small) with probability
/// p_small, N(0, var_large) otherwise. Non-mixture regimes have p_small = 1
/// and var_small == var_large.
struct RagNoise {
  double p_small = 1.0;
  double var_small = 0.0;
  double var_large = 0.0;

  double expected_variance() const { return p_small * var_small + (1.0 - p_small) * var_large; }
};

RagNoise rag_noise_params(const NoiseRegime& regime, double sigma2, double delta2_i);

struct PromptSample {
  Matrix X_icl;     // m x d
  Matrix X_rag;     // n x d, row i = x_q + offsets row i
  Matrix offsets;   // n x d
  Vector eps_icl;   // m
  Vector eps_rag;   // n
  Vector y;         // m + n, in-context labels first
  Vector x_q;       // d
  double y_q = 0.0;
  double eps_q = 0.0;
  Vector beta;
  Vector delta2;    // n
  /// Mixture regime only: 1 where the small-noise branch was drawn.
  std::vector<std::uint8_t> small_noise;

  std::size_t m() const { return static_cast<std::size_t>(X_icl.rows()); }
  std::size_t n() const { return static_cast<std::size_t>(X_rag.rows()); }
  std::size_t d() const { return static_cast<std::size_t>(x_q.size()); }

  /// Context inputs stacked as [X_icl; X_rag].
  Matrix design() const;
  /// Label noise stacked as [eps_icl; eps_rag].
  Vector noise() const;
};

/// Draws one test prompt (ICL rows, RAG rows around x_q, query) for a valid config.
PromptSample sample_test_prompt(const ExperimentConfig& config, RandomStream& stream);

/// Same as above with a precomputed schedule; avoids rebuilding it per trial.
PromptSample sample_test_prompt(const ExperimentConfig& config, const DeltaSchedule& schedule,
                                RandomStream& stream);

/// Draws one pretraining prompt with beta_pt ~ N(0, I) and no retrieved rows.
PromptSample sample_pretrain_prompt(std::size_t m, std::size_t d, double sigma2, RandomStream& stream);

/// Whitespace-separated dump, one line per example:
/// role index x_1..x_d y eps delta2  (role in {icl, rag, query}).
void write_samples(std::ostream& out, const PromptSample& sample);

}  // namespace raglsa
