#include "raglsa/datagen.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "raglsa/config.hpp"

namespace raglsa {

namespace {

// y = X beta + eps, then eps is re-derived from y so that y - X beta gives
// back the stored noise without a rounding residue.
void set_labels(PromptSample& s) {
  const Vector signal_icl = s.X_icl * s.beta;
  const Vector signal_rag = s.X_rag * s.beta;
  const double signal_q = s.x_q.dot(s.beta);
  const auto m = s.X_icl.rows();
  const auto n = s.X_rag.rows();
  s.y.resize(m + n);
  s.y.head(m) = signal_icl + s.eps_icl;
  s.y.tail(n) = signal_rag + s.eps_rag;
  s.y_q = signal_q + s.eps_q;
  s.eps_icl = s.y.head(m) - signal_icl;
  s.eps_rag = s.y.tail(n) - signal_rag;
  s.eps_q = s.y_q - signal_q;
}

}  // namespace

DeltaSchedule DeltaSchedule::constant(std::size_t n, double delta2) {
  return DeltaSchedule{Vector::Constant(static_cast<Eigen::Index>(n), delta2)};
}

DeltaSchedule DeltaSchedule::power_law(std::size_t n, double gamma2, double q) {
  Vector v(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    v(static_cast<Eigen::Index>(i)) = gamma2 * std::pow(static_cast<double>(i + 1), q);
  return DeltaSchedule{std::move(v)};
}

DeltaSchedule delta_schedule(const NoiseRegime& regime, std::size_t n) {
  if (const auto* u = std::get_if<UniformNoise>(&regime)) return DeltaSchedule::constant(n, u->delta2);
  if (const auto* p = std::get_if<DistanceProportionalNoise>(&regime))
    return DeltaSchedule::power_law(n, p->gamma2, p->q);
  const auto& x = std::get<MixtureNoise>(regime);
  return DeltaSchedule::power_law(n, x.gamma2, x.q);
}

RagNoise rag_noise_params(const NoiseRegime& regime, double sigma2, double delta2_i) {
  if (!(delta2_i >= 0.0)) throw std::invalid_argument("delta2_i must be >= 0");
  if (const auto* u = std::get_if<UniformNoise>(&regime)) return {1.0, u->sigma2_rag, u->sigma2_rag};
  if (const auto* p = std::get_if<DistanceProportionalNoise>(&regime)) {
    const double v = p->gamma1 * sigma2 * delta2_i;
    return {1.0, v, v};
  }
  const auto& x = std::get<MixtureNoise>(regime);
  return {std::pow(1.0 + delta2_i, -x.q_tilde), x.c_s * sigma2, x.c_l * sigma2};
}

Matrix PromptSample::design() const {
  Matrix X(X_icl.rows() + X_rag.rows(), x_q.size());
  X << X_icl, X_rag;
  return X;
}

Vector PromptSample::noise() const {
  Vector e(eps_icl.size() + eps_rag.size());
  e << eps_icl, eps_rag;
  return e;
}

PromptSample sample_test_prompt(const ExperimentConfig& config, RandomStream& stream) {
  validate(config);
  return sample_test_prompt(config, delta_schedule(config.regime, config.n), stream);
}

PromptSample sample_test_prompt(const ExperimentConfig& config, const DeltaSchedule& schedule,
                                RandomStream& stream) {
  const auto m = static_cast<Eigen::Index>(config.m);
  const auto n = static_cast<Eigen::Index>(config.n);
  const auto d = static_cast<Eigen::Index>(config.d);
  if (schedule.size() != config.n) throw std::invalid_argument("delta schedule length must equal n");
  const double sigma = std::sqrt(config.sigma2);
  const bool mixture = std::holds_alternative<MixtureNoise>(config.regime);

  PromptSample s;
  s.beta = config.beta.beta;
  s.delta2 = schedule.values;

  // Draw order is part of the reproducibility contract.
  s.x_q.resize(d);
  stream.fill_normal(s.x_q);
  s.X_icl.resize(m, d);
  for (Eigen::Index i = 0; i < m; ++i) {
    auto row = s.X_icl.row(i);
    stream.fill_normal(row);
  }
  s.eps_icl.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) s.eps_icl(i) = sigma * stream.normal();

  s.offsets.resize(n, d);
  s.eps_rag.resize(n);
  if (mixture) s.small_noise.assign(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double delta2_i = schedule.values(i);
    const double scale = std::sqrt(delta2_i);
    for (Eigen::Index k = 0; k < d; ++k) s.offsets(i, k) = scale * stream.normal();
    const RagNoise law = rag_noise_params(config.regime, config.sigma2, delta2_i);
    double var = law.var_small;
    if (mixture) {
      const bool small = stream.uniform() < law.p_small;
      s.small_noise[static_cast<std::size_t>(i)] = small ? 1 : 0;
      var = small ? law.var_small : law.var_large;
    }
    s.eps_rag(i) = std::sqrt(var) * stream.normal();
  }
  s.X_rag = s.offsets.rowwise() + s.x_q.transpose();
  // Recompute so that X_rag - x_q reproduces the stored offsets bit-for-bit.
  s.offsets = s.X_rag.rowwise() - s.x_q.transpose();

  s.eps_q = sigma * stream.normal();
  set_labels(s);
  return s;
}

PromptSample sample_pretrain_prompt(std::size_t m_count, std::size_t d_count, double sigma2, RandomStream& stream) {
  if (m_count == 0) throw std::invalid_argument("pretraining prompt needs m >= 1");
  if (d_count == 0) throw std::invalid_argument("d must be >= 1");
  if (!(sigma2 >= 0.0)) throw std::invalid_argument("sigma2 must be >= 0");
  const auto m = static_cast<Eigen::Index>(m_count);
  const auto d = static_cast<Eigen::Index>(d_count);
  const double sigma = std::sqrt(sigma2);

  PromptSample s;
  s.beta.resize(d);
  stream.fill_normal(s.beta);
  s.x_q.resize(d);
  stream.fill_normal(s.x_q);
  s.X_icl.resize(m, d);
  for (Eigen::Index i = 0; i < m; ++i) {
    auto row = s.X_icl.row(i);
    stream.fill_normal(row);
  }
  s.eps_icl.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) s.eps_icl(i) = sigma * stream.normal();
  s.eps_q = sigma * stream.normal();
  s.X_rag.resize(0, d);
  s.offsets.resize(0, d);
  s.eps_rag.resize(0);
  s.delta2.resize(0);
  set_labels(s);
  return s;
}

void write_samples(std::ostream& out, const PromptSample& s) {
  auto row = [&](const char* role, std::size_t index, const auto& x, double y, double eps, double delta2) {
    out << role << ' ' << index;
    for (Eigen::Index k = 0; k < x.size(); ++k) out << ' ' << format_double(x(k));
    out << ' ' << format_double(y) << ' ' << format_double(eps) << ' ' << format_double(delta2) << '\n';
  };
  out << "# role index";
  for (std::size_t k = 0; k < s.d(); ++k) out << " x" << k + 1;
  out << " y eps delta2\n";
  const auto m = static_cast<Eigen::Index>(s.m());
  for (Eigen::Index i = 0; i < m; ++i)
    row("icl", static_cast<std::size_t>(i + 1), s.X_icl.row(i), s.y(i), s.eps_icl(i), 0.0);
  for (Eigen::Index i = 0; i < s.X_rag.rows(); ++i)
    row("rag", static_cast<std::size_t>(i + 1), s.X_rag.row(i), s.y(m + i), s.eps_rag(i), s.delta2(i));
  row("query", 0, s.x_q, s.y_q, s.eps_q, 0.0);
}

}  // namespace raglsa
