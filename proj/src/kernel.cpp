#include "spdeloc/kernel.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "spdeloc/error.hpp"
#include "spdeloc/quadrature.hpp"

namespace spdeloc {

namespace {

// φ(u) = exp(-a/(1-u)) and its first four derivatives.
std::array<double, 5> bump_derivs(double u, double a) {
  if (u >= 1.0) return {0.0, 0.0, 0.0, 0.0, 0.0};
  const double s = 1.0 - u;
  const double phi = std::exp(-a / s);
  if (phi == 0.0) return {0.0, 0.0, 0.0, 0.0, 0.0};
  const double is = 1.0 / s;
  const double g1 = -a * is * is;
  const double g2 = 2.0 * g1 * is;
  const double g3 = 3.0 * g2 * is;
  const double g4 = 4.0 * g3 * is;
  return {phi, phi * g1, phi * (g2 + g1 * g1), phi * (g3 + 3.0 * g1 * g2 + g1 * g1 * g1),
          phi * (g4 + 4.0 * g1 * g3 + 3.0 * g2 * g2 + 6.0 * g1 * g1 * g2 + g1 * g1 * g1 * g1)};
}

class BumpProfile final : public RadialProfile {
 public:
  explicit BumpProfile(double a) : a_(a) {}
  std::array<double, 3> eval(double u) const override {
    const auto p = bump_derivs(u, a_);
    return {p[0], p[1], p[2]};
  }

 private:
  double a_;
};

// ψ = Δ[φ(|x|²)] = 2dφ' + 4uφ''.
class LaplacianBumpProfile final : public RadialProfile {
 public:
  LaplacianBumpProfile(int d, double a) : d_(d), a_(a) {}
  std::array<double, 3> eval(double u) const override {
    const auto p = bump_derivs(u, a_);
    const double d = d_;
    return {2.0 * d * p[1] + 4.0 * u * p[2], (2.0 * d + 4.0) * p[2] + 4.0 * u * p[3],
            (2.0 * d + 8.0) * p[3] + 4.0 * u * p[4]};
  }

 private:
  int d_;
  double a_;
};

}  // namespace

double sphere_area(int d) {
  switch (d) {
    case 1: return 2.0;
    case 2: return 2.0 * std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi;
    default: return 2.0 * std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0);
  }
}

Kernel::Kernel(int d, Family family, double a, double amplitude) : d_(d), family_(family), a_(a), amp_(amplitude) {
  if (d < 1 || d > 3) fail(ErrorKind::InvalidConfig, "kernel dimension must be 1, 2 or 3");
  if (!(a > 0.0)) fail(ErrorKind::InvalidConfig, "bump shape parameter must be positive");
  if (family == Family::Bump)
    profile_ = std::make_shared<BumpProfile>(a);
  else
    profile_ = std::make_shared<LaplacianBumpProfile>(d, a);
  compute_norms();
}

Kernel Kernel::bump(int d, double a, double amplitude) { return Kernel(d, Family::Bump, a, amplitude); }

Kernel Kernel::laplacian_bump(int d, double a, double amplitude) {
  return Kernel(d, Family::LaplacianBump, a, amplitude);
}

std::string Kernel::name() const {
  std::ostringstream os;
  os << (family_ == Family::Bump ? "bump" : "laplacian_bump") << "(a=" << a_;
  if (amp_ != 1.0) os << ",amp=" << amp_;
  os << ")";
  return os.str();
}

Kernel Kernel::scaled(double c) const {
  Kernel k = *this;
  k.amp_ *= c;
  k.norm_ *= std::abs(c);
  k.grad_norm_ *= std::abs(c);
  k.lap_norm_ *= std::abs(c);
  k.integral_ *= c;
  return k;
}

std::array<double, 3> Kernel::profile(double u) const {
  auto p = profile_->eval(u);
  p[0] *= amp_;
  p[1] *= amp_;
  p[2] *= amp_;
  return p;
}

double Kernel::value(const double* x) const {
  double u = 0.0;
  for (int i = 0; i < d_; ++i) u += x[i] * x[i];
  return profile(u)[0];
}

double Kernel::derivative(const MultiIndex& alpha, const double* x) const {
  double u = 0.0;
  for (int i = 0; i < d_; ++i) u += x[i] * x[i];
  if (u >= 1.0) return 0.0;
  const auto p = profile(u);
  const int ord = alpha.order();
  if (ord == 0) return p[0];
  int i = -1, j = -1;
  for (int ax = 0; ax < d_; ++ax) {
    for (int r = 0; r < alpha.a[ax]; ++r) (i < 0 ? i : j) = ax;
  }
  if (ord == 1) return 2.0 * x[i] * p[1];
  return (i == j ? 2.0 * p[1] : 0.0) + 4.0 * x[i] * x[j] * p[2];
}

double Kernel::adjoint_apply(const std::vector<double>& coeff, const double* x) const {
  static thread_local std::vector<MultiIndex> idx;
  static thread_local int idx_dim = 0;
  if (idx_dim != d_) {
    idx = multi_indices(d_, 2);
    idx_dim = d_;
  }
  double s = 0.0;
  for (size_t k = 0; k < idx.size(); ++k) {
    if (coeff[k] == 0.0) continue;
    const double sign = (idx[k].order() % 2 == 0) ? 1.0 : -1.0;
    s += sign * coeff[k] * derivative(idx[k], x);
  }
  return s;
}

double Kernel::radial_value(double r) const { return profile(r * r)[0]; }

double Kernel::radial_grad_sq(double r) const {
  const double g = 2.0 * r * profile(r * r)[1];
  return g * g;
}

double Kernel::radial_laplacian(double r) const {
  const auto p = profile(r * r);
  return 2.0 * d_ * p[1] + 4.0 * r * r * p[2];
}

void Kernel::compute_norms() {
  const double area = sphere_area(d_);
  const int dm1 = d_ - 1;
  auto radial_int = [&](auto f) {
    return area * integrate_doubling([&](double r) { return f(r) * std::pow(r, dm1); }, 0.0, 1.0, 1e-15, 40, 1024)
                      .value;
  };
  norm_ = std::sqrt(radial_int([&](double r) { return std::pow(radial_value(r), 2); }));
  grad_norm_ = std::sqrt(radial_int([&](double r) { return radial_grad_sq(r); }));
  lap_norm_ = std::sqrt(radial_int([&](double r) { return std::pow(radial_laplacian(r), 2); }));
  integral_ = radial_int([&](double r) { return radial_value(r); });
}

ScaledKernel::ScaledKernel(const Kernel& k, double delta, const std::array<double, 3>& center)
    : k_(&k), delta_(delta), center_(center), scale_(std::pow(delta, -0.5 * k.dim())), idx_(multi_indices(k.dim(), 2)) {}

double ScaledKernel::value(const double* y) const {
  double z[3];
  for (int i = 0; i < k_->dim(); ++i) z[i] = (y[i] - center_[i]) / delta_;
  return scale_ * k_->value(z);
}

double ScaledKernel::derivative(const MultiIndex& alpha, const double* y) const {
  double z[3];
  for (int i = 0; i < k_->dim(); ++i) z[i] = (y[i] - center_[i]) / delta_;
  return scale_ * std::pow(delta_, -alpha.order()) * k_->derivative(alpha, z);
}

double ScaledKernel::adjoint_apply(const std::vector<double>& coeff, const double* y) const {
  double z[3];
  for (int i = 0; i < k_->dim(); ++i) z[i] = (y[i] - center_[i]) / delta_;
  double s = 0.0;
  for (size_t k = 0; k < idx_.size(); ++k) {
    if (coeff[k] == 0.0) continue;
    const int ord = idx_[k].order();
    const double sign = (ord % 2 == 0) ? 1.0 : -1.0;
    s += sign * coeff[k] * std::pow(delta_, -ord) * k_->derivative(idx_[k], z);
  }
  return scale_ * s;
}

ScaledKernel scale_kernel(const Kernel& k, double delta, const std::array<double, 3>& center) {
  if (!(delta > 0.0)) fail(ErrorKind::InvalidConfig, "δ must be positive");
  const double r = delta * k.support_radius();
  for (int i = 0; i < k.dim(); ++i) {
    if (!(center[i] - r > 0.0 && center[i] + r < 1.0)) {
      std::ostringstream os;
      os << "support of K_{δ,x} with δ=" << delta << " leaves (0,1)^" << k.dim() << " at axis " << i;
      fail(ErrorKind::SupportViolation, os.str());
    }
  }
  return ScaledKernel(k, delta, center);
}

}  // namespace spdeloc
