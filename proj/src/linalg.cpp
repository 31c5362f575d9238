#include "spdeloc/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <complex>
#include <limits>

#include "spdeloc/error.hpp"

namespace spdeloc {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonElliptic: return "NonElliptic";
    case ErrorKind::FactorizationFailure: return "FactorizationFailure";
    case ErrorKind::NotDissipative: return "NotDissipative";
    case ErrorKind::SupportViolation: return "SupportViolation";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::NotSelfAdjoint: return "NotSelfAdjoint";
    case ErrorKind::SingularInformation: return "SingularInformation";
    case ErrorKind::Divergent: return "Divergent";
    case ErrorKind::SingularGram: return "SingularGram";
    case ErrorKind::Degenerate: return "Degenerate";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::Unsupported: return "Unsupported";
  }
  return "Error";
}

Mat sym_sqrt(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()));
  Vec s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().transpose();
}

double op_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues()(0);
}

double sym_condition(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

bool solve_lyapunov(const Mat& b, const Mat& c, Mat& s) {
  using C = std::complex<double>;
  using CMat = Eigen::MatrixXcd;
  const Eigen::Index n = b.rows();
  Eigen::ComplexSchur<CMat> schur(b.cast<C>());
  const CMat& t = schur.matrixT();
  const CMat& u = schur.matrixU();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(t(i, i).real() < 0.0)) return false;
  }
  // B = U T U*, S = U Y U*:  T Y + Y T* = -U* C U
  CMat rhs = -(u.adjoint() * c.cast<C>() * u);
  CMat y = CMat::Zero(n, n);
  for (Eigen::Index j = n - 1; j >= 0; --j) {
    Eigen::VectorXcd r = rhs.col(j);
    for (Eigen::Index k = j + 1; k < n; ++k) r -= std::conj(t(j, k)) * y.col(k);
    CMat shifted = t;
    shifted.diagonal().array() += std::conj(t(j, j));
    y.col(j) = shifted.triangularView<Eigen::Upper>().solve(r);
  }
  Mat out = (u * y * u.adjoint()).real();
  s = 0.5 * (out + out.transpose());
  return true;
}

}  // namespace spdeloc
