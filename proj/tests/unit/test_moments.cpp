#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "raglsa/moments.hpp"

using namespace raglsa;

namespace {

// Per-entry |mc - target| <= k * stderr.
void check_brackets(const MomentResult& mc, const Matrix& target, double k = 4.0) {
  REQUIRE(mc.has_stderr());
  REQUIRE(mc.value.rows() == target.rows());
  REQUIRE(mc.value.cols() == target.cols());
  for (Eigen::Index i = 0; i < target.size(); ++i) {
    INFO("entry " << i << ": mc=" << mc.value(i) << " target=" << target(i) << " se=" << (*mc.standard_error)(i));
    CHECK(testutil::within_k(mc.value(i), target(i), (*mc.standard_error)(i), k));
  }
}

MomentResult run_mc(MomentKernel k, const MomentParams& p, std::size_t trials, std::uint64_t seed) {
  RandomStream s = derive_stream(seed, 0);
  return mc_moment(k, p, trials, s);
}

}  // namespace

TEST_CASE("fourth_moment_vec closed form") {
  CHECK(fourth_moment_vec(Matrix::Identity(3, 3)).isApprox(5.0 * Matrix::Identity(3, 3)));
  CHECK(fourth_moment_vec(Matrix::Zero(3, 3)).isZero());
  CHECK_THROWS(fourth_moment_vec(Matrix::Zero(2, 3)));

  testutil::Rng rng(1);
  const Matrix S = [&] {
    Matrix A = rng.square(4);
    return Matrix(A + A.transpose());
  }();
  const Matrix F = fourth_moment_vec(S);
  CHECK((F - F.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fourth_moment_vec vs Monte Carlo, d = 2") {
  testutil::Rng rng(2);
  MomentParams p;
  p.A = rng.square(2);
  check_brackets(run_mc(MomentKernel::FourthVec, p, 1'000'000, 21), fourth_moment_vec(p.A));
}

TEST_CASE("fourth_moment_design") {
  testutil::Rng rng(3);
  const Matrix W = rng.square(3);
  CHECK((fourth_moment_design(W, 1) - fourth_moment_vec(W)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(fourth_moment_design(Matrix::Identity(2, 2), 3).isApprox(18.0 * Matrix::Identity(2, 2)));
  CHECK(fourth_moment_design(W, 0).isZero(0.0));

  MomentParams p;
  p.A = W;
  p.m = 4;
  check_brackets(run_mc(MomentKernel::FourthDesign, p, 400'000, 31), fourth_moment_design(W, 4));
}

TEST_CASE("scalar_fourth_moment") {
  for (int d = 1; d <= 5; ++d) {
    const Matrix I = Matrix::Identity(d, d);
    CHECK(scalar_fourth_moment(I, I) == doctest::Approx(d * d + 2 * d));
  }
  Matrix e1 = Matrix::Zero(2, 2), e2 = Matrix::Zero(2, 2);
  e1(0, 0) = 1.0;
  e2(1, 1) = 1.0;
  CHECK(scalar_fourth_moment(e1, e2) == doctest::Approx(1.0));
  CHECK_THROWS(scalar_fourth_moment(Matrix::Identity(2, 2), Matrix::Identity(3, 3)));

  testutil::Rng rng(4);
  MomentParams p;
  p.A = rng.square(3);
  p.B = rng.square(3);
  Matrix target(1, 1);
  target(0, 0) = scalar_fourth_moment(p.A, p.B);
  check_brackets(run_mc(MomentKernel::ScalarFourth, p, 1'000'000, 41), target);
}

TEST_CASE("mixed fourth moments: degenerate and identity cases") {
  testutil::Rng rng(5);
  const Matrix W = rng.square(3);
  const auto zero = mixed_fourth_moments(W, 0.0);
  for (const Matrix* M : zero.all()) CHECK(M->isZero(0.0));

  const auto mm = mixed_fourth_moments(Matrix::Identity(2, 2), 1.0);
  CHECK(mm.rr_rr.isApprox(4.0 * Matrix::Identity(2, 2)));
  // Items four and five share one value.
  const auto r = mixed_fourth_moments(W, 0.7);
  CHECK((r.rx_rx - r.rr_xx).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mixed fourth moments vs Monte Carlo") {
  testutil::Rng rng(6);
  MomentParams p;
  p.A = rng.square(3);
  p.delta2 = 0.3;
  const auto cf = mixed_fourth_moments(p.A, p.delta2);
  const MomentKernel kernels[] = {MomentKernel::MixedRrRr, MomentKernel::MixedRxXr, MomentKernel::MixedXrRx,
                                  MomentKernel::MixedRxRx, MomentKernel::MixedRrXx};
  const auto targets = cf.all();
  for (int k = 0; k < 5; ++k) {
    CAPTURE(k);
    check_brackets(run_mc(kernels[k], p, 600'000, 60 + k), *targets[k]);
  }
}

TEST_CASE("sixth moment special cases") {
  for (int d = 1; d <= 6; ++d) {
    const Matrix I = Matrix::Identity(d, d);
    CHECK(sixth_moment(I, I).isApprox((d + 2.0) * (d + 4.0) * I));
  }
  testutil::Rng rng(7);
  const Matrix B = rng.square(4);
  CHECK(sixth_moment(Matrix::Zero(4, 4), B).isZero());

  const Matrix W = rng.square(4);
  const Matrix Wt = W.transpose();
  const double tr = W.trace();
  const Matrix expected = 2.0 * (W * W + Wt * Wt + Wt * W + W * Wt + tr * (W + Wt)) +
                          (tr * tr + (W * W).trace() + (Wt * W).trace()) * Matrix::Identity(4, 4);
  CHECK((sixth_moment(W, Wt) - expected).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((isserlis_sixth_oracle(W, Wt) - expected).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("sixth moment of commuting diagonals matches univariate moments") {
  // E[x^2] = 1, E[x^4] = 3, E[x^6] = 15 for a standard normal.
  const double mom[] = {1.0, 1.0, 3.0, 15.0};
  testutil::Rng rng(8);
  const int d = 4;
  const Vector a = rng.vector(d), b = rng.vector(d);
  Matrix expected = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k)
      for (int l = 0; l < d; ++l) {
        int count[4] = {0, 0, 0, 0};
        ++count[i];
        ++count[k];
        ++count[l];
        double e = 1.0;
        for (int c : count) e *= mom[c];
        expected(i, i) += a(k) * b(l) * e;
      }
  const Matrix got = sixth_moment(a.asDiagonal(), b.asDiagonal());
  CHECK((got - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("pairing oracle structure") {
  CHECK(perfect_matchings(2).size() == 1);
  CHECK(perfect_matchings(4).size() == 3);
  CHECK(perfect_matchings(6).size() == 15);
  CHECK(perfect_matchings(8).size() == 105);
  CHECK_THROWS(perfect_matchings(5));

  // Every matching covers each index exactly once.
  for (const auto& matching : perfect_matchings(6)) {
    int seen[6] = {0, 0, 0, 0, 0, 0};
    for (const auto& pr : matching) {
      ++seen[pr[0]];
      ++seen[pr[1]];
    }
    for (int s : seen) CHECK(s == 1);
  }

  const Matrix one = Matrix::Identity(1, 1);
  CHECK(isserlis_sixth_oracle(one, one)(0, 0) == doctest::Approx(15.0));
  CHECK_THROWS(isserlis_sixth_oracle(Matrix::Identity(9, 9), Matrix::Identity(9, 9)));
}

TEST_CASE("sixth moment closed form agrees with the pairing oracle") {
  testutil::Rng rng(9);
  double worst = 0.0;
  for (int d = 1; d <= 5; ++d)
    for (int k = 0; k < 100; ++k) {
      const Matrix A = rng.square(d), B = rng.square(d);
      worst = std::max(worst, (sixth_moment(A, B) - isserlis_sixth_oracle(A, B)).cwiseAbs().maxCoeff());
    }
  CHECK(worst <= 1e-9);
}

TEST_CASE("mc_moment targets and degenerate sample") {
  MomentParams p;
  p.A = Matrix::Identity(3, 3);
  check_brackets(run_mc(MomentKernel::FourthVec, p, 1'000'000, 91), 5.0 * Matrix::Identity(3, 3));

  RandomStream s = derive_stream(1, 0);
  const MomentResult one = mc_moment(MomentKernel::FourthVec, p, 1, s);
  CHECK_FALSE(one.has_stderr());
  CHECK(one.trials == 1);
  CHECK_THROWS(mc_moment(MomentKernel::FourthVec, p, 0, s));

  CHECK_THROWS(parse_moment_kernel("seventh"));
  CHECK(parse_moment_kernel("sixth") == MomentKernel::Sixth);
  CHECK(moment_kernel_name(MomentKernel::MixedRxXr) == "mixed_rx_xr");
}

TEST_CASE("odd-order moment vanishes") {
  testutil::Rng rng(10);
  MomentParams p;
  p.A = rng.square(3);
  const MomentResult mc = run_mc(MomentKernel::Third, p, 400'000, 101);
  check_brackets(mc, Matrix::Zero(mc.value.rows(), mc.value.cols()));
}

TEST_CASE("sixth moment Monte Carlo brackets the closed form") {
  testutil::Rng rng(11);
  MomentParams p;
  p.A = rng.square(2, 0.5);
  p.B = rng.square(2, 0.5);
  const MomentResult mc = run_mc(MomentKernel::Sixth, p, 2'000'000, 111);
  CHECK(mc.order == 6);
  check_brackets(mc, sixth_moment(p.A, p.B));
}
