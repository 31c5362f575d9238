#pragma once

#include <Eigen/SparseCore>
#include <array>
#include <vector>

#include "spdeloc/linalg.hpp"
#include "spdeloc/operator.hpp"

namespace spdeloc {

using SpMat = Eigen::SparseMatrix<double>;

// Dirichlet-Laplacian eigenbasis on (0,1)^d, d ∈ {1, 2}:
// e_j(x) = Π_a √2 sin(j_a π x_a), λ'_j = π² |j|². Modes sorted by λ' (ties by index).
class SineBasis {
 public:
  SineBasis() = default;
  SineBasis(int d, int per_axis);

  int dim() const { return d_; }
  int per_axis() const { return n_; }
  int size() const { return static_cast<int>(modes_.size()); }
  const std::array<int, 2>& mode(int j) const { return modes_[j]; }
  double eigenvalue(int j) const { return lambda_[j]; }
  const Vec& eigenvalues() const { return lambda_; }
  // Position of the tensor index (j1, j2) (1-based wavenumbers) in the sorted list.
  int index_of(int j1, int j2 = 1) const;

  double eval(int j, const double* x) const;

 private:
  int d_ = 1;
  int n_ = 0;
  std::vector<std::array<int, 2>> modes_;
  std::vector<int> lookup_;
  Vec lambda_;
};

// One-dimensional factor ⟨D^k e_l, e_j⟩ for k ∈ {0,1,2}, 1-based wavenumbers.
double sine_factor(int k, int j, int l);

struct GalerkinSystem {
  SineBasis basis;
  Vec theta;
  SpMat drift;           // B[j][l] = ⟨A_θ e_l, e_j⟩
  bool diagonal = true;  // true when B has no off-diagonal entries
  double c_theta = 0.0;

  int size() const { return basis.size(); }
  Mat dense() const { return Mat(drift); }
  Vec diag() const { return Vec(drift.diagonal()); }
};

// Matrix of a constant-coefficient operator in the sine basis.
SpMat operator_matrix(const SineBasis& basis, const std::vector<double>& coeff);

// B(θ) = B_0 + Σ θ_i B_i.
struct GalerkinOperators {
  SineBasis basis;
  SpMat base;
  std::vector<SpMat> terms;
};

GalerkinOperators galerkin_operators(const OperatorSpec& spec, const SineBasis& basis);
GalerkinSystem assemble(const OperatorSpec& spec, const GalerkinOperators& ops, const Vec& theta);

// N is the number of modes per axis (N×N tensor modes in d=2).
GalerkinSystem galerkin_drift(const OperatorSpec& spec, const Vec& theta, int N);

// ⟨A e_l, e_j⟩ by tensor composite Gauss-Legendre quadrature with panel doubling.
double galerkin_entry_quadrature(const SineBasis& basis, const std::vector<double>& coeff, int j, int l,
                                 double tol = 1e-11);

}  // namespace spdeloc
