#include "raglsa/moments.hpp"

#include <stdexcept>
#include <string>

#include "raglsa/stats.hpp"

namespace raglsa {

namespace {

void require_square(const Matrix& M, const char* name) {
  if (M.rows() != M.cols())
    throw std::invalid_argument(std::string(name) + " must be square, got " + std::to_string(M.rows()) + "x" +
                                std::to_string(M.cols()));
}

void require_same_shape(const Matrix& A, const Matrix& B) {
  require_square(A, "A");
  require_square(B, "B");
  if (A.rows() != B.rows()) throw std::invalid_argument("A and B must have the same dimension");
}

Matrix identity(Eigen::Index d) { return Matrix::Identity(d, d); }

void recurse_matchings(std::vector<int>& open, std::vector<std::array<int, 2>>& current,
                       std::vector<std::vector<std::array<int, 2>>>& out) {
  if (open.empty()) {
    out.push_back(current);
    return;
  }
  const int first = open.front();
  for (std::size_t k = 1; k < open.size(); ++k) {
    const int partner = open[k];
    std::vector<int> rest;
    rest.reserve(open.size() - 2);
    for (std::size_t j = 1; j < open.size(); ++j)
      if (j != k) rest.push_back(open[j]);
    current.push_back({first, partner});
    recurse_matchings(rest, current, out);
    current.pop_back();
  }
}

}  // namespace

Matrix fourth_moment_vec(const Matrix& W) {
  require_square(W, "W");
  return W + W.transpose() + W.trace() * identity(W.rows());
}

Matrix fourth_moment_design(const Matrix& W, std::size_t m) {
  require_square(W, "W");
  const double mm = static_cast<double>(m);
  return mm * mm * W + mm * W.transpose() + mm * W.trace() * identity(W.rows());
}

double scalar_fourth_moment(const Matrix& A, const Matrix& B) {
  require_same_shape(A, B);
  return (A * (B + B.transpose())).trace() + A.trace() * B.trace();
}

MixedFourthMoments mixed_fourth_moments(const Matrix& W, double delta2) {
  require_square(W, "W");
  if (!(delta2 >= 0.0)) throw std::invalid_argument("delta2 must be >= 0");
  const Matrix I = identity(W.rows());
  const Matrix WtW = W.transpose() * W;
  const double tr = W.trace();
  const double tr_wtw = WtW.trace();
  const double d4 = delta2 * delta2;

  MixedFourthMoments out;
  out.rr_rr = 2.0 * d4 * WtW + d4 * tr_wtw * I;
  out.rx_xr = delta2 * ((W * W).trace() + tr_wtw + tr * tr) * I;
  out.xr_rx = 2.0 * delta2 * W * W.transpose() + delta2 * tr_wtw * I;
  out.rx_rx = delta2 * (WtW + W.transpose() * W.transpose() + tr * W.transpose());
  out.rr_xx = out.rx_rx;
  return out;
}

Matrix sixth_moment(const Matrix& A, const Matrix& B) {
  require_same_shape(A, B);
  const Matrix At = A.transpose();
  const Matrix Bt = B.transpose();
  const double trA = A.trace();
  const double trB = B.trace();
  return A * B + A * Bt + At * B + At * Bt + Bt * A + Bt * At + B * A + B * At  //
         + trB * (A + At) + trA * (B + Bt)                                     //
         + (trA * trB + (A * Bt).trace() + (A * B).trace()) * identity(A.rows());
}

std::vector<std::vector<std::array<int, 2>>> perfect_matchings(int s) {
  if (s < 0 || s % 2 != 0) throw std::invalid_argument("perfect matchings need an even number of indices");
  std::vector<int> open(static_cast<std::size_t>(s));
  for (int i = 0; i < s; ++i) open[static_cast<std::size_t>(i)] = i;
  std::vector<std::array<int, 2>> current;
  std::vector<std::vector<std::array<int, 2>>> out;
  recurse_matchings(open, current, out);
  return out;
}

Matrix isserlis_sixth_oracle(const Matrix& A, const Matrix& B) {
  require_same_shape(A, B);
  const auto d = static_cast<std::size_t>(A.rows());
  if (d > kMaxOracleDim)
    throw std::invalid_argument("pairing oracle supports d <= " + std::to_string(kMaxOracleDim));

  // Index slots in E[x_i x_k x_l x_m x_n x_j]: 0=i 1=k 2=l 3=m 4=n 5=j.
  static const auto matchings = perfect_matchings(6);
  const auto di = static_cast<Eigen::Index>(d);
  Matrix T = Matrix::Zero(di, di);
  std::array<Eigen::Index, 6> idx{};
  for (idx[0] = 0; idx[0] < di; ++idx[0])
    for (idx[5] = 0; idx[5] < di; ++idx[5]) {
      double acc = 0.0;
      for (idx[1] = 0; idx[1] < di; ++idx[1])
        for (idx[2] = 0; idx[2] < di; ++idx[2])
          for (idx[3] = 0; idx[3] < di; ++idx[3])
            for (idx[4] = 0; idx[4] < di; ++idx[4]) {
              int moment = 0;
              for (const auto& matching : matchings) {
                bool all_equal = true;
                for (const auto& pair : matching)
                  if (idx[static_cast<std::size_t>(pair[0])] != idx[static_cast<std::size_t>(pair[1])]) {
                    all_equal = false;
                    break;
                  }
                moment += all_equal ? 1 : 0;
              }
              if (moment != 0) acc += A(idx[1], idx[2]) * B(idx[3], idx[4]) * moment;
            }
      T(idx[0], idx[5]) = acc;
    }
  return T;
}

MomentKernel parse_moment_kernel(std::string_view name) {
  for (int k = 0; k <= static_cast<int>(MomentKernel::Third); ++k) {
    const auto kernel = static_cast<MomentKernel>(k);
    if (moment_kernel_name(kernel) == name) return kernel;
  }
  throw std::invalid_argument("unknown moment kernel '" + std::string(name) + "'");
}

std::string_view moment_kernel_name(MomentKernel kernel) {
  switch (kernel) {
    case MomentKernel::FourthVec: return "fourth_vec";
    case MomentKernel::FourthDesign: return "fourth_design";
    case MomentKernel::ScalarFourth: return "scalar_fourth";
    case MomentKernel::MixedRrRr: return "mixed_rr_rr";
    case MomentKernel::MixedRxXr: return "mixed_rx_xr";
    case MomentKernel::MixedXrRx: return "mixed_xr_rx";
    case MomentKernel::MixedRxRx: return "mixed_rx_rx";
    case MomentKernel::MixedRrXx: return "mixed_rr_xx";
    case MomentKernel::Sixth: return "sixth";
    case MomentKernel::Third: return "third";
  }
  return "?";
}

namespace {

int kernel_order(MomentKernel kernel) {
  switch (kernel) {
    case MomentKernel::Sixth: return 6;
    case MomentKernel::Third: return 3;
    default: return 4;
  }
}

}  // namespace

MomentResult closed_form_moment(MomentKernel kernel, const MomentParams& p) {
  MomentResult out;
  out.order = kernel_order(kernel);
  out.source = MomentSource::ClosedForm;
  switch (kernel) {
    case MomentKernel::FourthVec: out.value = fourth_moment_vec(p.A); break;
    case MomentKernel::FourthDesign: out.value = fourth_moment_design(p.A, p.m); break;
    case MomentKernel::ScalarFourth:
      out.value = Matrix::Constant(1, 1, scalar_fourth_moment(p.A, p.B));
      break;
    case MomentKernel::MixedRrRr: out.value = mixed_fourth_moments(p.A, p.delta2).rr_rr; break;
    case MomentKernel::MixedRxXr: out.value = mixed_fourth_moments(p.A, p.delta2).rx_xr; break;
    case MomentKernel::MixedXrRx: out.value = mixed_fourth_moments(p.A, p.delta2).xr_rx; break;
    case MomentKernel::MixedRxRx: out.value = mixed_fourth_moments(p.A, p.delta2).rx_rx; break;
    case MomentKernel::MixedRrXx: out.value = mixed_fourth_moments(p.A, p.delta2).rr_xx; break;
    case MomentKernel::Sixth: out.value = sixth_moment(p.A, p.B); break;
    case MomentKernel::Third:
      require_square(p.A, "A");
      out.value = Matrix::Zero(p.A.rows(), 1);
      break;
  }
  return out;
}

MomentResult mc_moment(MomentKernel kernel, const MomentParams& p, std::size_t trials, RandomStream& stream) {
  if (trials == 0) throw std::invalid_argument("mc_moment needs at least one trial");
  require_square(p.A, "A");
  const Eigen::Index d = p.A.rows();
  if (kernel == MomentKernel::ScalarFourth || kernel == MomentKernel::Sixth) require_same_shape(p.A, p.B);
  const double delta = std::sqrt(p.delta2);
  const Matrix& W = p.A;

  RunningMatrixStat acc;
  Vector x(d), r(d);
  Matrix X(static_cast<Eigen::Index>(p.m), d);
  Matrix sample;
  for (std::size_t t = 0; t < trials; ++t) {
    switch (kernel) {
      case MomentKernel::FourthVec:
        stream.fill_normal(x);
        sample = (x.dot(W * x)) * (x * x.transpose());
        break;
      case MomentKernel::FourthDesign: {
        stream.fill_normal(X);
        const Matrix G = X.transpose() * X;
        sample = G * W * G;
        break;
      }
      case MomentKernel::ScalarFourth:
        stream.fill_normal(x);
        sample = Matrix::Constant(1, 1, x.dot(p.A * x) * x.dot(p.B * x));
        break;
      case MomentKernel::MixedRrRr:
      case MomentKernel::MixedRxXr:
      case MomentKernel::MixedXrRx:
      case MomentKernel::MixedRxRx:
      case MomentKernel::MixedRrXx: {
        stream.fill_normal(x);
        stream.fill_normal(r);
        r *= delta;
        const double xwx = x.dot(W * x);
        const double xwr = x.dot(W * r);
        if (kernel == MomentKernel::MixedRrRr) sample = xwr * xwr * (r * r.transpose());
        else if (kernel == MomentKernel::MixedRxXr) sample = xwx * xwx * (r * r.transpose());
        else if (kernel == MomentKernel::MixedXrRx) sample = xwr * xwr * (x * x.transpose());
        else sample = xwx * xwr * (r * x.transpose());
        break;
      }
      case MomentKernel::Sixth:
        stream.fill_normal(x);
        sample = x.dot(p.A * x) * x.dot(p.B * x) * (x * x.transpose());
        break;
      case MomentKernel::Third:
        stream.fill_normal(x);
        sample = x.dot(W * x) * x;
        break;
    }
    acc.push(sample);
  }

  MomentResult out;
  out.order = kernel_order(kernel);
  out.source = MomentSource::MonteCarlo;
  out.value = acc.mean;
  out.trials = trials;
  if (trials >= 2) out.standard_error = acc.stderr_of_mean();
  return out;
}

}  // namespace raglsa
