#pragma once

#include <cstdint>
#include <optional>

#include "spdeloc/galerkin.hpp"
#include "spdeloc/linalg.hpp"
#include "spdeloc/random.hpp"

namespace spdeloc {

// Exact one-step law of dx = Bx dt + σ dβ over a step of length dt.
struct Stepper {
  double dt = 0.0;
  double noise_scale = 1.0;
  Mat phi;     // exp(B dt)
  Mat q;       // ∫_0^dt exp(Bs) exp(Bᵀs) ds
  Mat factor;  // lower-triangular, factor·factorᵀ = σ² q (+ jitter)
  int jitter_escalations = -1;  // -1: no jitter needed

  // Present when built with integrals: S = ∫ x ds over the step.
  bool with_integrals = false;
  Mat psi;           // ∫_0^dt exp(Bs) ds
  Mat joint_factor;  // factor of σ²·Cov([x noise; S noise]) (2N × 2N)

  int size() const { return static_cast<int>(phi.rows()); }
};

Stepper build_stepper(const Mat& b, double dt, bool with_integrals = false, double noise_scale = 1.0);
Stepper build_stepper(const GalerkinSystem& system, double dt, bool with_integrals = false,
                      double noise_scale = 1.0);

// Mode-wise law for diagonal drift μ_j (B = diag(μ)): x' = φx + l11 z1,
// S = ψx + l21 z1 + l22 z2.
struct DiagonalStepper {
  double dt = 0.0;
  double noise_scale = 1.0;
  Vec mu, phi, psi, l11, l21, l22;
  int size() const { return static_cast<int>(mu.size()); }
};

DiagonalStepper build_diagonal_stepper(const Vec& mu, double dt, double noise_scale = 1.0);

// Entries of the 2×2 noise covariance of (x(dt), ∫x) for a scalar mode with drift μ and unit noise:
// {Var x, Cov(x, S), Var S}, stable for small |μ dt|.
struct ScalarOuMoments {
  double phi, psi, v11, v12, v22;
};
ScalarOuMoments scalar_ou_moments(double mu, double dt);

enum class InitialMode { Zero, Stationary };

// Stationary covariance: B Σ + Σ Bᵀ = -I (throws NotDissipative).
Mat stationary_covariance(const Mat& b);
// Lower factor of Σ∞ (dense systems).
Mat stationary_factor(const GalerkinSystem& system);
Vec sample_initial(const GalerkinSystem& system, InitialMode mode, const NormalStream& rng,
                   double noise_scale = 1.0);

struct CoefficientTrajectory {
  Vec times;     // t_0..t_n
  RowMat x;      // (n+1) × N
  RowMat frame;  // n × N step integrals (empty unless requested)
  uint64_t seed = 0;
  uint64_t replicate = 0;
};

// Block index m+1 of `rng` drives step m; block 0 is reserved for the initial condition.
CoefficientTrajectory simulate_path(const Stepper& stepper, const Vec& x0, int n_steps, const NormalStream& rng);
CoefficientTrajectory simulate_path(const DiagonalStepper& stepper, const Vec& x0, int n_steps,
                                    const NormalStream& rng, bool with_integrals = false);

void write_trajectory_csv(const CoefficientTrajectory& traj, const std::string& path);

}  // namespace spdeloc
