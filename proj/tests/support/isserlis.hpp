// Test-only Gaussian moment engine. Each slot holds a zero-mean isotropic
// Gaussian vector tagged by a label; slots with equal labels are the same
// vector, distinct labels are independent. Expectations are summed directly
// over perfect matchings with Kronecker-delta covariances, so nothing here
// relies on a closed form from the library.
#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Matrix = Eigen::MatrixXd;

struct Slot {
  int label = 0;
  double variance = 1.0;
};

inline double pair_cov(const Slot& a, int ia, const Slot& b, int ib) {
  return (a.label == b.label && ia == ib) ? a.variance : 0.0;
}

// E[prod_k u_k[idx_k]] over an even number of slots.
template <std::size_t K>
double product_moment(const std::array<Slot, K>& slots, const std::array<int, K>& idx) {
  static_assert(K % 2 == 0);
  // Recursive pairing of the first free slot with each later one.
  std::array<bool, K> used{};
  auto rec = [&](auto&& self) -> double {
    std::size_t first = K;
    for (std::size_t k = 0; k < K; ++k)
      if (!used[k]) {
        first = k;
        break;
      }
    if (first == K) return 1.0;
    used[first] = true;
    double sum = 0.0;
    for (std::size_t j = first + 1; j < K; ++j) {
      if (used[j]) continue;
      const double c = pair_cov(slots[first], idx[first], slots[j], idx[j]);
      if (c == 0.0) continue;
      used[j] = true;
      sum += c * self(self);
      used[j] = false;
    }
    used[first] = false;
    return sum;
  };
  return rec(rec);
}

/// E[u1 (u2^T A u3) u4^T]
inline Matrix pattern4(const std::array<Slot, 4>& s, const Matrix& A) {
  const int d = static_cast<int>(A.rows());
  Matrix out = Matrix::Zero(d, d);
  for (int p = 0; p < d; ++p)
    for (int q = 0; q < d; ++q)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
          if (A(k, l) == 0.0) continue;
          out(p, q) += A(k, l) * product_moment<4>(s, {p, k, l, q});
        }
  return out;
}

/// E[u1 (u2^T A u3)(u4^T B u5) u6^T]
inline Matrix pattern6(const std::array<Slot, 6>& s, const Matrix& A, const Matrix& B) {
  const int d = static_cast<int>(A.rows());
  Matrix out = Matrix::Zero(d, d);
  for (int p = 0; p < d; ++p)
    for (int q = 0; q < d; ++q)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
          if (A(k, l) == 0.0) continue;
          for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
              if (B(a, b) == 0.0) continue;
              out(p, q) += A(k, l) * B(a, b) * product_moment<6>(s, {p, k, l, a, b, q});
            }
        }
  return out;
}

/// E[(u1^T A u2)(u3^T B u4)]
inline double scalar4(const std::array<Slot, 4>& s, const Matrix& A, const Matrix& B) {
  const int d = static_cast<int>(A.rows());
  double out = 0.0;
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l)
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) out += A(k, l) * B(a, b) * product_moment<4>(s, {k, l, a, b});
  return out;
}

}  // namespace oracle
