#pragma once

#include <string>

#include "spdeloc/estimator.hpp"

namespace spdeloc {

struct InferenceConfig {
  double alpha = 0.05;
  int p = 1;
  double q = 0.0;   // χ²_p quantile at 1-α
  double z = 0.0;   // standard normal quantile at 1-α

  static InferenceConfig make(double alpha, int p);
};

struct Membership {
  bool inside = false;
  double statistic = 0.0;  // (θ̂-θ)ᵀ I (θ̂-θ) / ‖K‖²
};

// θ ∈ C_α iff (θ̂-θ)ᵀ I_δ (θ̂-θ) ≤ q_{1-α}, with I_δ normalized to ‖K‖ = 1.
Membership confidence_set_membership(const Vec& theta, const EstimateReport& report, const InferenceConfig& cfg);

// Metadata for the reaction test in the Δ + transport + reaction model.
struct ReactionModel {
  int d = 3;
  double T = 1.0;
  int M = 1;
  double delta = 1.0;
  // Σ_k ‖(-Δ)^{-1/2} K_{δ,x_k}‖² / ‖K‖²; equals M δ² ‖(-Δ)^{-1/2}K‖² / ‖K‖² on R^d (d ≥ 3).
  double negative_sobolev_total = 0.0;
  int diffusion_index = 0;
  int reaction_index = 2;
};

// Uses M δ² ‖(-Δ)^{-1/2}K‖²/‖K‖² from the Fourier quadrature (d ≥ 3 only).
ReactionModel reaction_model(const Kernel& k, double T, int M, double delta);

struct ReactionTest {
  double statistic = 0.0;        // (T Σ_k‖(-Δ)^{-1/2}K_k‖² / (2θ̂_1))^{1/2} θ̂_3
  bool reject = false;           // |statistic| > z_{1-α}
  bool reject_one_sided = false; // statistic < -z_{1-α}
  double info_statistic = 0.0;   // θ̂_3 / (‖K‖ (I^{-1})_{33}^{1/2})
  bool reject_info = false;      // info_statistic < -z_{1-α}
  bool invalid_regime = false;   // d ≤ 2
  std::string note;
};

ReactionTest reaction_test(const EstimateReport& report, const InferenceConfig& cfg, const ReactionModel& model);

// nominal ± width binomial standard errors, clipped to [0, 1].
struct RateBand {
  double low = 0.0, high = 1.0;
};
RateBand binomial_band(double nominal, int reps, double width = 3.0);

std::string coverage_csv_header();
std::string coverage_csv_row(double delta, int M, int reps, double coverage, const RateBand& band);

}  // namespace spdeloc
