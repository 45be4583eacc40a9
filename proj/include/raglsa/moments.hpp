// Gaussian moment kernels for x ~ N(0, I) and offsets r ~ N(0, delta^2 I).
//
// Closed forms are cross-checked by two independent routes: explicit
// enumeration of Isserlis pairings (isserlis_sixth_oracle) and sampling
// (mc_moment).
#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "raglsa/config.hpp"

namespace raglsa {

/// E[x x^T W x x^T] = W + W^T + tr(W) I.
Matrix fourth_moment_vec(const Matrix& W);

/// E[X^T X W X^T X] = m^2 W + m W^T + m tr(W) I for X with m i.i.d. N(0, I) rows.
Matrix fourth_moment_design(const Matrix& W, std::size_t m);

/// E[x^T A x x^T B x] = tr(A (B + B^T)) + tr(A) tr(B).
double scalar_fourth_moment(const Matrix& A, const Matrix& B);

/// The five mixed moments with x ~ N(0, I), r ~ N(0, delta2 I), in order.
struct MixedFourthMoments {
  Matrix rr_rr;  // E[r r^T W^T x x^T W r r^T]
  Matrix rx_xr;  // E[r x^T W^T x x^T W x r^T]
  Matrix xr_rx;  // E[x r^T W^T x x^T W r x^T]
  Matrix rx_rx;  // E[r x^T W^T x x^T W r x^T]
  Matrix rr_xx;  // E[r r^T W^T x x^T W x x^T]

  std::array<const Matrix*, 5> all() const { return {&rr_rr, &rx_xr, &xr_rx, &rx_rx, &rr_xx}; }
};

MixedFourthMoments mixed_fourth_moments(const Matrix& W, double delta2);

/// E[x x^T A x x^T B x x^T] in closed form (15 terms).
Matrix sixth_moment(const Matrix& A, const Matrix& B);

/// All perfect matchings of {0, ..., s-1}; s must be even. There are (s-1)!! of them.
std::vector<std::vector<std::array<int, 2>>> perfect_matchings(int s);

/// Largest dimension accepted by isserlis_sixth_oracle.
inline constexpr std::size_t kMaxOracleDim = 8;

/// E[x x^T A x x^T B x x^T] computed entrywise by summing A_kl B_mn times the
/// sixth moment E[x_i x_k x_l x_m x_n x_j], the latter evaluated as a sum over
/// the 15 perfect matchings of Kronecker-delta products.
Matrix isserlis_sixth_oracle(const Matrix& A, const Matrix& B);

enum class MomentKernel {
  FourthVec,     // E[x x^T A x x^T]
  FourthDesign,  // E[X^T X A X^T X], m rows
  ScalarFourth,  // E[x^T A x x^T B x]
  MixedRrRr,
  MixedRxXr,
  MixedXrRx,
  MixedRxRx,
  MixedRrXx,
  Sixth,         // E[x x^T A x x^T B x x^T]
  Third,         // E[x x^T A x], zero by symmetry
};

MomentKernel parse_moment_kernel(std::string_view name);
std::string_view moment_kernel_name(MomentKernel kernel);

struct MomentParams {
  Matrix A;
  Matrix B;            // used by ScalarFourth and Sixth
  std::size_t m = 1;   // rows for FourthDesign
  double delta2 = 0.0; // offset variance for the mixed kernels
};

enum class MomentSource { ClosedForm, PairingOracle, MonteCarlo };

struct MomentResult {
  Matrix value;  // 1x1 for scalar kernels
  int order = 4;
  MomentSource source = MomentSource::ClosedForm;
  /// Per-entry standard error; empty when trials < 2.
  std::optional<Matrix> standard_error;
  std::size_t trials = 0;

  bool has_stderr() const { return standard_error.has_value(); }
};

/// Closed-form value of a kernel, for use as a Monte Carlo target.
MomentResult closed_form_moment(MomentKernel kernel, const MomentParams& params);

/// Sample-mean estimate of a kernel with per-entry standard errors.
MomentResult mc_moment(MomentKernel kernel, const MomentParams& params, std::size_t trials,
                       RandomStream& stream);

}  // namespace raglsa
