#include "raglsa/montecarlo.hpp"

#include <stdexcept>

#include "raglsa/datagen.hpp"
#include "raglsa/parallel.hpp"
#include "raglsa/predictor.hpp"
#include "raglsa/stats.hpp"

namespace raglsa {

namespace {

struct BlockStats {
  RunningStat total, variance, bias, cross;

  void merge(const BlockStats& o) {
    total.merge(o.total);
    variance.merge(o.variance);
    bias.merge(o.bias);
    cross.merge(o.cross);
  }
};

McEstimate to_estimate(const RunningStat& s, McComponent c) {
  return {s.mean, s.stderr_of_mean(), s.count, c};
}

}  // namespace

ComponentEstimates estimate_components(const WeightMatrix& W, const ExperimentConfig& config,
                                       const McOptions& options) {
  validate(config);
  if (W.dim() != config.d) throw std::invalid_argument("W dimension does not match config d");
  if (config.trials < 2) throw std::invalid_argument("trials must be >= 2");
  if (options.block_size == 0) throw std::invalid_argument("block_size must be >= 1");

  const DeltaSchedule schedule = delta_schedule(config.regime, config.n);
  const Matrix& Wm = W.entries();
  const Vector& beta = config.beta.beta;
  const std::size_t trials = config.trials;
  const std::size_t blocks = (trials + options.block_size - 1) / options.block_size;

  auto run_block = [&](std::size_t b) {
    BlockStats st;
    const std::size_t begin = b * options.block_size;
    const std::size_t end = std::min(trials, begin + options.block_size);
    for (std::size_t t = begin; t < end; ++t) {
      RandomStream stream = derive_stream(config.seed, t);
      const PromptSample s = sample_test_prompt(config, schedule, stream);

      Matrix G = s.X_icl.transpose() * s.X_icl;
      G.noalias() += s.X_rag.transpose() * s.X_rag;
      Vector xt_eps = s.X_icl.transpose() * s.eps_icl;
      xt_eps.noalias() += s.X_rag.transpose() * s.eps_rag;

      const double bias_term = s.x_q.dot(beta - Wm * (G * beta));
      const double var_term = s.x_q.dot(Wm * xt_eps);
      const double err = s.y_q - predict(W, s);

      st.total.push(err * err);
      st.variance.push(var_term * var_term);
      st.bias.push(bias_term * bias_term);
      st.cross.push(-2.0 * bias_term * var_term);
    }
    return st;
  };

  auto parts = parallel_map<BlockStats>(blocks, options.workers, run_block);
  const BlockStats all = tree_reduce(std::move(parts), [](BlockStats& a, const BlockStats& b) { a.merge(b); });

  return {to_estimate(all.total, McComponent::Total), to_estimate(all.variance, McComponent::Variance),
          to_estimate(all.bias, McComponent::Bias), to_estimate(all.cross, McComponent::Cross)};
}

LossBreakdown estimate_loss(const WeightMatrix& W, const ExperimentConfig& config, const McOptions& options) {
  const ComponentEstimates est = estimate_components(W, config, options);
  LossBreakdown out;
  out.variance = est.variance.mean;
  out.bias = est.bias.mean;
  out.irreducible = config.sigma2;
  out.total = est.total.mean;
  out.source = LossSource::MonteCarlo;
  out.standard_error = LossStderr{est.variance.standard_error, est.bias.standard_error, est.total.standard_error};
  return out;
}

std::size_t empirical_argmin_n(const ExperimentConfig& base, const std::vector<std::size_t>& n_grid, ArgminPath path,
                               const McOptions& options) {
  if (n_grid.empty()) throw std::invalid_argument("n grid is empty");
  if (base.m == 0) throw std::invalid_argument("argmin over n needs m >= 1");

  std::size_t best_n = 0;
  double best = 0.0;
  bool first = true;
  for (const std::size_t n : n_grid) {
    ExperimentConfig cfg = base;
    cfg.n = n;
    const WeightMatrix W = optimal_pretrained_weight(cfg.m, n, cfg.d);
    double loss = 0.0;
    if (path == ArgminPath::MonteCarlo) {
      loss = estimate_loss(W, cfg, options).total;
    } else if (const auto* u = std::get_if<UniformNoise>(&cfg.regime)) {
      loss = isotropic_loss(cfg.m, n, cfg.d, u->delta2, cfg.sigma2, u->sigma2_rag, cfg.beta.norm2()).total;
    } else {
      loss = regime_loss(W, cfg).total;
    }
    if (first || loss < best || (loss == best && n < best_n)) {
      best = loss;
      best_n = n;
      first = false;
    }
  }
  return best_n;
}

}  // namespace raglsa
