#pragma once

#include <string>

#include "spdeloc/kernel.hpp"
#include "spdeloc/linalg.hpp"
#include "spdeloc/operator.hpp"

namespace spdeloc {

// K sampled on `samples` points per axis over [-2, 2]^d, zero-padded by `padding` per axis.
// Zero means the per-dimension default (d=1: 4096×4, d=2: 512×4, d=3: 64×4).
struct FourierOptions {
  int samples = 0;
  int padding = 0;
};

struct SigmaResult {
  Mat sigma;
  Mat error;  // |fine - coarse lattice| per entry (after extrapolation where used)
  int samples = 0;
  int padding = 0;
  std::string quadrature;
};

// (Σ_θ)_ij = (T/2) ∫ Re(σ_i conj σ_j)/s_θ dξ/(2π)^d with σ_i the symbol of Ā_i^* times K̂ and
// s_θ the principal symbol of -A_θ. Throws Divergent for non-integrable pairs.
SigmaResult asymptotic_sigma_full(const Kernel& k, const OperatorSpec& spec, const Vec& theta, double T,
                                  const FourierOptions& opt = {});
Mat asymptotic_sigma(const Kernel& k, const OperatorSpec& spec, const Vec& theta, double T,
                     const FourierOptions& opt = {});

// ‖(-Δ)^s ∂_axis K‖² (no derivative when axis < 0).
double fourier_norm_sq(const Kernel& k, double s, int axis = -1, const FourierOptions& opt = {});

}  // namespace spdeloc
