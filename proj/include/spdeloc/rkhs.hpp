#pragma once

#include <functional>
#include <vector>

#include "spdeloc/galerkin.hpp"
#include "spdeloc/linalg.hpp"
#include "spdeloc/projection.hpp"

namespace spdeloc {

// h on a uniform grid of [0, T] with its derivative.
struct SampledFunction {
  double T = 1.0;
  Vec h;
  Vec dh;
  bool analytic_derivative = false;
  double derivative_error = 0.0;  // estimated max error of finite-difference derivatives

  int points() const { return static_cast<int>(h.size()); }
  double dt() const { return T / (h.size() - 1); }

  static SampledFunction from_function(const std::function<double(double)>& f,
                                       const std::function<double(double)>& df, double T, int points);
  // Second-order central differences, one-sided second-order stencils at the ends.
  static SampledFunction from_values(const Vec& values, double T);
};

double trapezoid(const Vec& f, double dt);

// λ²∫h² + λ(h(T)² + h(0)²) + ∫h'².
double ou_rkhs_norm(const SampledFunction& h, double lambda);
// Polarization of ou_rkhs_norm.
double ou_rkhs_inner(const SampledFunction& f, const SampledFunction& g, double lambda);

struct SpdeNorm {
  double series = 0.0;       // Σ_j ‖h_j‖²_{Y_j}
  double closed_form = 0.0;  // ‖A h‖² + ‖h'‖² + ‖(-A)^{1/2}h(0)‖² + ‖(-A)^{1/2}h(T)‖²
};
SpdeNorm spde_rkhs_norm(const std::vector<SampledFunction>& modes, const Vec& lambda);

struct BoundCheck {
  double norm = 0.0;
  double bound = 0.0;
  bool holds = true;
};
// bound = 3‖A h‖² + ‖h‖² + 2‖h'‖² (T ≥ 1).
BoundCheck rkhs_bound_check(const std::vector<SampledFunction>& modes, const Vec& lambda, double tol = 1e-9);

// (3‖G^{-1}‖²‖G_A‖ + ‖G^{-1}‖)Σ‖h_k‖² + 2‖G^{-1}‖Σ‖h_k'‖² (operator norms), with
// G = (⟨K_k, K_l⟩) and G_A = (⟨A K_k, A K_l⟩).
double measurement_rkhs_bound(const Mat& gram, const Mat& gram_a, const std::vector<SampledFunction>& h);
// Disjoint supports, A = Δ, ‖K‖ = 1: 4δ^{-4}‖ΔK‖²Σ‖h_k‖² + 2Σ‖h_k'‖² (valid for δ² ≤ ‖ΔK‖).
double laplace_measurement_bound(double delta, double laplacian_norm, const std::vector<SampledFunction>& h);

// Centered Gaussians N(0, C0), N(0, C1) with the eigen-decomposition of C0.
struct GaussianPairTruncation {
  Mat c0, c1;
  Vec sigma2;  // eigenvalues of C0 (ascending)
  Mat u;       // eigenvectors of C0

  int dim() const { return static_cast<int>(c0.rows()); }
  // Throws Degenerate if C0 has an eigenvalue ≤ 1e-12·trace.
  static GaussianPairTruncation make(const Mat& c0, const Mat& c1);
};

// H² = ∫(√p0 - √p1)² = 2 - 2 det(C0)^{1/4} det(C1)^{1/4} / det((C0+C1)/2)^{1/2}.
double hellinger_gaussian(const GaussianPairTruncation& pair);
double hellinger_gaussian(const Mat& c0, const Mat& c1);

struct LowerBound {
  double s_value = 0.0;  // Σ_{j,k} ⟨u_j, (C1-C0)u_k⟩² / (σ_j²σ_k²)
  bool certified = false;  // S ≤ 1/2
  double hellinger = 0.0;
  bool consistent = true;  // certified ⇒ H² ≤ 1
};
LowerBound lower_bound_condition(const GaussianPairTruncation& pair);

// Stationary covariance of (⟨X(t_m), K_k⟩)_{m,k} for t_m = m·dt, m < n, from a Galerkin system.
// Index layout: row m·M + k.
Mat measurement_covariance(const GalerkinSystem& system, const RowMat& g, double dt, int n);

// Omitted-mode bound: the largest share of Σ_j g_kj²/(2λ_j) beyond the basis, from the
// projection tail energy.
double truncation_trace_bound(const GalerkinSystem& system, const ProjectionTensor& proj, double kernel_norm);

}  // namespace spdeloc
