#include "raglsa/predictor.hpp"

#include <stdexcept>

namespace raglsa {

double predict(const WeightMatrix& W, const PromptSample& s) {
  const auto d = static_cast<Eigen::Index>(s.d());
  if (static_cast<Eigen::Index>(W.dim()) != d) throw std::invalid_argument("W dimension does not match x_q");
  if (s.X_icl.cols() != d || s.X_rag.cols() != d) throw std::invalid_argument("context rows have wrong width");
  const Eigen::Index m = s.X_icl.rows();
  const Eigen::Index n = s.X_rag.rows();
  if (m + n == 0) throw std::invalid_argument("prompt has no context rows");
  if (s.y.size() != m + n) throw std::invalid_argument("label vector length must equal m + n");

  Vector xty = s.X_icl.transpose() * s.y.head(m);
  xty.noalias() += s.X_rag.transpose() * s.y.tail(n);
  return s.x_q.dot(W.entries() * xty);
}

WeightMatrix pretrained_weight(std::size_t m, std::size_t d) {
  if (m == 0) throw std::invalid_argument("pretrained weight needs m >= 1");
  return WeightMatrix::isotropic(d, 1.0 / static_cast<double>(m + d + 1));
}

WeightMatrix adapt_weight(const WeightMatrix& W_bar, std::size_t m, std::size_t m_prime) {
  if (m == 0 || m_prime == 0) throw std::invalid_argument("context lengths must be >= 1");
  return W_bar.scaled(static_cast<double>(m) / static_cast<double>(m_prime));
}

WeightMatrix optimal_pretrained_weight(std::size_t m, std::size_t n, std::size_t d) {
  if (m == 0) throw std::invalid_argument("optimal pretrained weight needs m >= 1");
  const double mm = static_cast<double>(m);
  return WeightMatrix::isotropic(d, mm / (static_cast<double>(m + d + 1) * static_cast<double>(m + n)));
}

}  // namespace raglsa
