// Small shared utilities for the test binaries.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "raglsa/config.hpp"

namespace testutil {

using raglsa::Matrix;
using raglsa::Vector;

/// Test-local generator so fixtures never share the library's stream domains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  std::size_t integer(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(engine_);
  }

  Matrix matrix(std::size_t rows, std::size_t cols, double scale = 1.0) {
    Matrix A(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < A.size(); ++i) A(i) = scale * normal();
    return A;
  }
  Matrix square(std::size_t d, double scale = 1.0) { return matrix(d, d, scale); }
  Vector vector(std::size_t d) {
    Vector v(static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal();
    return v;
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// |estimate - target| <= k * stderr, with an exact match accepted at zero stderr.
inline bool within_k(double estimate, double target, double stderr_value, double k = 4.0) {
  return std::abs(estimate - target) <= k * stderr_value;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testutil
