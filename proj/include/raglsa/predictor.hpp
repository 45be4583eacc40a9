// Linear self-attention forward pass and the pretrained weight family.
#pragma once

#include <cstddef>

#include "raglsa/config.hpp"
#include "raglsa/datagen.hpp"

namespace raglsa {

/// y_hat = x_q^T W X^T y with X = [X_icl; X_rag]. Cost O((m+n) d + d^2).
double predict(const WeightMatrix& W, const PromptSample& sample);

/// Pretraining optimum for context length m: I / (m + d + 1).
WeightMatrix pretrained_weight(std::size_t m, std::size_t d);

/// Rescales a weight learned at context length m for use at length m_prime:
/// (m / m_prime) * W_bar.
WeightMatrix adapt_weight(const WeightMatrix& W_bar, std::size_t m, std::size_t m_prime);

/// W* = m / ((m + d + 1)(m + n)) * I, the pretrained optimum adapted to m + n context rows.
WeightMatrix optimal_pretrained_weight(std::size_t m, std::size_t n, std::size_t d);

}  // namespace raglsa
