// Single-pass mean/variance accumulators with deterministic merging.
#pragma once

#include <cmath>
#include <cstddef>
#include <limits>

#include "raglsa/config.hpp"

namespace raglsa {

/// Welford accumulator; merge() uses the Chan et al. pairwise update so
/// a fixed merge tree gives bit-identical results.
struct RunningStat {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }

  void merge(const RunningStat& other) {
    if (other.count == 0) return;
    if (count == 0) {
      *this = other;
      return;
    }
    const double na = static_cast<double>(count);
    const double nb = static_cast<double>(other.count);
    const double n = na + nb;
    const double delta = other.mean - mean;
    mean += delta * nb / n;
    m2 += other.m2 + delta * delta * na * nb / n;
    count += other.count;
  }

  double variance() const {
    return count < 2 ? std::numeric_limits<double>::quiet_NaN() : m2 / static_cast<double>(count - 1);
  }
  /// sample-std / sqrt(count); NaN for fewer than two samples.
  double stderr_of_mean() const {
    return count < 2 ? std::numeric_limits<double>::quiet_NaN()
                     : std::sqrt(variance() / static_cast<double>(count));
  }
};

/// Entrywise RunningStat over equally shaped matrices.
struct RunningMatrixStat {
  std::size_t count = 0;
  Matrix mean;
  Matrix m2;

  void push(const Matrix& x) {
    if (count == 0) {
      mean = Matrix::Zero(x.rows(), x.cols());
      m2 = Matrix::Zero(x.rows(), x.cols());
    }
    ++count;
    const Matrix delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2.array() += delta.array() * (x - mean).array();
  }

  Matrix stderr_of_mean() const {
    return (m2 / static_cast<double>(count - 1) / static_cast<double>(count)).cwiseSqrt();
  }
};

}  // namespace raglsa
