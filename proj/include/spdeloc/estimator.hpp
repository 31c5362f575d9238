#pragma once

#include <string>
#include <vector>

#include "spdeloc/linalg.hpp"
#include "spdeloc/projection.hpp"

namespace spdeloc {

// Pointwise: left-endpoint Itô sums on grid values, trapezoid for time integrals.
// ExactDrift: the drift over each step is the exact step integral S^A = ∫ X^A ds, paired with the
// left-endpoint value Z = X^A(t_m):  θ̂ = (Σ Z Sᵀ)^{-1} Σ Z (ΔX - S^{A0}). The error term Σ Z ΔW
// stays a martingale, so no Δt bias enters; requires paths carrying step integrals.
enum class Scheme { Pointwise, ExactDrift };
const char* to_string(Scheme s);

// Additive statistics over measurements (and, in streaming use, over time blocks).
struct SufficientStatistics {
  int p = 0;
  int M = 0;
  long steps = 0;
  double dt = 0.0;
  Mat info_pt;       // Σ_k ∫ X^A X^Aᵀ dt (trapezoid)
  Vec ito_pt;        // Σ_k Σ_m X^A(t_m) (X(t_{m+1}) - X(t_m))
  Vec corr_pt;       // Σ_k ∫ X^A X^{A0} dt (trapezoid)
  Mat cross;         // Σ_k Σ_m X^A(t_m) S^A_mᵀ
  Mat left;          // Σ_k Σ_m X^A(t_m) X^A(t_m)ᵀ dt
  Vec corr_exact;    // Σ_k Σ_m X^A(t_m) S^{A0}_m
  bool has_frames = false;

  void reset(int p_, bool frames);
  void merge(const SufficientStatistics& other);
  double T() const { return steps * dt; }
};

SufficientStatistics accumulate(const MeasurementPath& path);

Mat observed_fisher(const MeasurementPath& path);

struct EstimatorOptions {
  Scheme scheme = Scheme::Pointwise;
  bool correction = true;        // include the A_0 drift correction
  double condition_cap = 1e12;
  bool throw_on_singular = true; // otherwise flag the report
};

struct EstimateReport {
  Scheme scheme = Scheme::Pointwise;
  Vec theta_hat;
  // information matching the scheme; ExactDrift: Jᵀ H^{-1} J with J = Σ Z Sᵀ, H = Σ Z Zᵀ dt
  Mat info;
  Mat info_pointwise;
  Vec theta_pointwise;
  Mat rho;
  Mat sigma;       // asymptotic Σ_θ when supplied
  Vec std_error;   // when θ_true supplied
  double condition = 0.0;
  bool flagged = false;
  std::string flag_reason;
  // discretization metadata
  double dt = 0.0;
  double T = 0.0;
  int M = 0;
  int N = 0;
  double delta = 0.0;
  double kernel_norm = 1.0;
  std::string quadrature;
};

EstimateReport estimate(const SufficientStatistics& stats, const EstimatorOptions& opt = {});
EstimateReport augmented_mle(const MeasurementPath& path, const EstimatorOptions& opt = {});

// diag(M^{-1/2} δ^{n_i - 1}).
Mat rate_matrix(double delta, int M, const std::vector<int>& orders);

// (ρ I ρ)^{1/2} ρ^{-1} (θ̂ - θ).
Vec standardized_error(const EstimateReport& report, const Vec& theta_true);

std::string report_csv_header(int p);
std::string report_csv_row(const EstimateReport& r);
std::string report_summary(const EstimateReport& r);

}  // namespace spdeloc
