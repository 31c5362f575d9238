#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "spdeloc/operator.hpp"

namespace spdeloc {

// Radial profile ψ(u), u = |x|², with derivatives up to order 2 in u; zero for u ≥ 1.
class RadialProfile {
 public:
  virtual ~RadialProfile() = default;
  virtual std::array<double, 3> eval(double u) const = 0;
};

// Point-spread function supported in the closed unit ball, radial in x.
class Kernel {
 public:
  enum class Family { Bump, LaplacianBump };

  // K(x) = exp(-a/(1-|x|²)) on the unit ball.
  static Kernel bump(int d, double a = 5.0, double amplitude = 1.0);
  // K = ΔK̃ with K̃ the bump: ∫K = 0 and ∫xK = 0.
  static Kernel laplacian_bump(int d, double a = 5.0, double amplitude = 1.0);

  int dim() const { return d_; }
  Family family() const { return family_; }
  std::string name() const;
  double shape_parameter() const { return a_; }
  double amplitude() const { return amp_; }
  double support_radius() const { return 1.0; }

  Kernel scaled(double c) const;  // amplitude multiplied by c

  double value(const double* x) const;
  // D^α K at x.
  double derivative(const MultiIndex& alpha, const double* x) const;
  // (Σ_α c_α (-1)^{|α|} D^α) K at x, coefficients aligned with multi_indices(d, 2).
  double adjoint_apply(const std::vector<double>& coeff, const double* x) const;

  // Radial value K(r) and the radial parts of |∇K|² and ΔK.
  double radial_value(double r) const;
  double radial_grad_sq(double r) const;
  double radial_laplacian(double r) const;

  double norm() const { return norm_; }
  double grad_norm() const { return grad_norm_; }
  double laplacian_norm() const { return lap_norm_; }
  double integral() const { return integral_; }

  bool nonnegative() const { return family_ == Family::Bump && amp_ >= 0.0; }
  bool zero_integral() const { return family_ == Family::LaplacianBump; }
  bool zero_first_moment() const { return true; }  // radial kernels
  // K̂(ξ) = O(|ξ|^m) at the origin.
  int fourier_vanishing_order() const { return family_ == Family::LaplacianBump ? 2 : 0; }

 private:
  Kernel(int d, Family family, double a, double amplitude);
  void compute_norms();
  std::array<double, 3> profile(double u) const;

  int d_ = 1;
  Family family_ = Family::Bump;
  double a_ = 5.0;
  double amp_ = 1.0;
  std::shared_ptr<const RadialProfile> profile_;
  double norm_ = 0.0, grad_norm_ = 0.0, lap_norm_ = 0.0, integral_ = 0.0;
};

// Surface area of the unit sphere in R^d.
double sphere_area(int d);

// K_{δ,x}(y) = δ^{-d/2} K((y - x)/δ).
class ScaledKernel {
 public:
  ScaledKernel(const Kernel& k, double delta, const std::array<double, 3>& center);

  double value(const double* y) const;
  double derivative(const MultiIndex& alpha, const double* y) const;
  double adjoint_apply(const std::vector<double>& coeff, const double* y) const;
  double delta() const { return delta_; }
  const std::array<double, 3>& center() const { return center_; }
  const Kernel& kernel() const { return *k_; }

 private:
  const Kernel* k_;
  double delta_;
  std::array<double, 3> center_;
  double scale_;
  std::vector<MultiIndex> idx_;
};

// Throws SupportViolation if the support of K_{δ,x} is not inside (0,1)^d.
ScaledKernel scale_kernel(const Kernel& k, double delta, const std::array<double, 3>& center);

}  // namespace spdeloc
