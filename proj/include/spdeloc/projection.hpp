#pragma once

#include <string>
#include <vector>

#include "spdeloc/design.hpp"
#include "spdeloc/galerkin.hpp"
#include "spdeloc/stepper.hpp"

namespace spdeloc {

// g[c](k, j) = ⟨A_c^* K_{δ,x_k}, e_j⟩ for channels c = 0 (identity), 1..p (A_i), p+1 (A_0).
struct ProjectionTensor {
  int p = 0;
  std::vector<RowMat> g;  // each M × N
  // 1 - Σ_j g² / ‖A_c^*K_δ‖², worst case over locations: the energy a channel loses to truncation.
  std::vector<double> tail_energy;
  int panels = 0;              // Gauss-Legendre panels per axis (40 nodes each)
  double doubling_change = 0;  // max relative change under the final panel doubling
  bool base_zero = true;

  int channels() const { return static_cast<int>(g.size()); }
  const RowMat& identity() const { return g[0]; }
  const RowMat& term(int i) const { return g[1 + i]; }
  const RowMat& base() const { return g[p + 1]; }
};

ProjectionTensor project_kernel(const MeasurementDesign& design, const OperatorSpec& spec, const SineBasis& basis);

// Coefficients of a single kernel function against e_j (used by tests and the RKHS module).
Vec project_function(const MeasurementDesign& design, int k, const std::vector<double>& adjoint_coeff,
                     const SineBasis& basis, int panels = 4);

struct MeasurementPath {
  Vec times;
  RowMat X;                // M × (n+1)
  std::vector<RowMat> XA;  // p × [M × (n+1)]
  RowMat XA0;              // M × (n+1)
  double noise_scale = 1.0;  // ‖K‖
  // Exact step integrals ∫ X^A ds, ∫ X^{A0} ds per step (M × n); empty when unavailable.
  std::vector<RowMat> SA;
  RowMat SA0;

  int M() const { return static_cast<int>(X.rows()); }
  int p() const { return static_cast<int>(XA.size()); }
  int steps() const { return static_cast<int>(X.cols()) - 1; }
  double dt() const { return times.size() > 1 ? times(1) - times(0) : 0.0; }
  bool has_frames() const { return !SA.empty(); }
};

MeasurementPath extract_measurements(const CoefficientTrajectory& traj, const ProjectionTensor& proj,
                                     double kernel_norm);

// Columns: t, X[k] (k=1..M), X_A[i][k] (i=1..p, k=1..M), X_A0[k].
void write_measurement_csv(const MeasurementPath& path, const std::string& file);
MeasurementPath read_measurement_csv(const std::string& file, int p, double kernel_norm);

struct CovarianceModel {
  Vec lambda;   // eigenvalues of -A_θ
  RowMat g;     // M × N projections of K_{δ,x_k}
  double tail_bound = 0.0;  // bound on the omitted series terms at t = 0
};

CovarianceModel covariance_model(const GalerkinSystem& system, const ProjectionTensor& proj, double kernel_norm);

// Stationary Cov(X_{δ,k}(s + t), X_{δ,l}(s)) = Σ_j g_kj g_lj e^{-λ_j|t|}/(2λ_j).
double analytic_covariance(const CovarianceModel& model, double t, int k, int l);
// Same series for arbitrary channel rows.
double analytic_covariance(const Vec& lambda, const Eigen::Ref<const Vec>& gk, const Eigen::Ref<const Vec>& gl,
                           double t);

}  // namespace spdeloc
