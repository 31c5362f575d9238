#pragma once

#include <Eigen/Dense>

namespace spdeloc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Symmetric square root via eigendecomposition; negative eigenvalues are clipped to zero.
Mat sym_sqrt(const Mat& a);

// Largest singular value.
double op_norm(const Mat& a);

// Ratio of extreme eigenvalues of a symmetric matrix (infinity if not positive definite).
double sym_condition(const Mat& a);

// Solves B S + S B^T = -C for a Hurwitz B (complex Schur / Bartels-Stewart).
// Returns false when B has an eigenvalue with nonnegative real part.
bool solve_lyapunov(const Mat& b, const Mat& c, Mat& s);

}  // namespace spdeloc
