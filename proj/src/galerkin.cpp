#include "spdeloc/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spdeloc/error.hpp"
#include "spdeloc/quadrature.hpp"

namespace spdeloc {

namespace {
constexpr double kPi = std::numbers::pi;
const double kSqrt2 = std::sqrt(2.0);

double sine_derivative(int k, int l, double x) {
  const double w = l * kPi;
  switch (k) {
    case 0: return kSqrt2 * std::sin(w * x);
    case 1: return kSqrt2 * w * std::cos(w * x);
    default: return -kSqrt2 * w * w * std::sin(w * x);
  }
}
}  // namespace

SineBasis::SineBasis(int d, int per_axis) : d_(d), n_(per_axis) {
  if (d != 1 && d != 2) fail(ErrorKind::Unsupported, "Galerkin basis is implemented for d = 1, 2");
  if (per_axis < 1) fail(ErrorKind::InvalidConfig, "basis size must be positive");
  if (d == 1) {
    for (int j = 1; j <= n_; ++j) modes_.push_back({j, 1});
  } else {
    for (int j1 = 1; j1 <= n_; ++j1)
      for (int j2 = 1; j2 <= n_; ++j2) modes_.push_back({j1, j2});
    std::stable_sort(modes_.begin(), modes_.end(), [](const auto& x, const auto& y) {
      return x[0] * x[0] + x[1] * x[1] < y[0] * y[0] + y[1] * y[1];
    });
  }
  lambda_.resize(size());
  lookup_.assign(static_cast<size_t>(n_) * (d == 2 ? n_ : 1), -1);
  for (int j = 0; j < size(); ++j) {
    const auto& m = modes_[j];
    lambda_(j) = kPi * kPi * (d == 1 ? double(m[0]) * m[0] : double(m[0]) * m[0] + double(m[1]) * m[1]);
    lookup_[static_cast<size_t>(m[0] - 1) * (d == 2 ? n_ : 1) + (d == 2 ? m[1] - 1 : 0)] = j;
  }
}

int SineBasis::index_of(int j1, int j2) const {
  if (j1 < 1 || j1 > n_) return -1;
  if (d_ == 1) return lookup_[j1 - 1];
  if (j2 < 1 || j2 > n_) return -1;
  return lookup_[static_cast<size_t>(j1 - 1) * n_ + (j2 - 1)];
}

double SineBasis::eval(int j, const double* x) const {
  const auto& m = modes_[j];
  double v = kSqrt2 * std::sin(m[0] * kPi * x[0]);
  if (d_ == 2) v *= kSqrt2 * std::sin(m[1] * kPi * x[1]);
  return v;
}

double sine_factor(int k, int j, int l) {
  switch (k) {
    case 0: return j == l ? 1.0 : 0.0;
    case 1: {
      if (j == l || ((j + l) % 2 == 0)) return 0.0;
      return 4.0 * double(l) * j / (double(j) * j - double(l) * l);
    }
    default: return j == l ? -(l * kPi) * (l * kPi) : 0.0;
  }
}

SpMat operator_matrix(const SineBasis& basis, const std::vector<double>& coeff) {
  const int d = basis.dim();
  const int n = basis.size();
  const int na = basis.per_axis();
  const auto idx = multi_indices(d, 2);
  std::vector<Eigen::Triplet<double>> trip;
  for (size_t a = 0; a < idx.size(); ++a) {
    const double c = coeff[a];
    if (c == 0.0) continue;
    const MultiIndex& m = idx[a];
    if (d == 1) {
      const int k = m.a[0];
      for (int l = 0; l < n; ++l) {
        const int wl = basis.mode(l)[0];
        if (k != 1) {
          trip.emplace_back(l, l, c * sine_factor(k, wl, wl));
          continue;
        }
        for (int j = 0; j < n; ++j) {
          const double f = sine_factor(1, basis.mode(j)[0], wl);
          if (f != 0.0) trip.emplace_back(j, l, c * f);
        }
      }
    } else {
      const int kx = m.a[0], ky = m.a[1];
      for (int l = 0; l < n; ++l) {
        const auto& ml = basis.mode(l);
        // candidate rows: per axis either the same wavenumber (k even) or opposite parity (k = 1)
        auto axis_candidates = [&](int k, int wl) {
          std::vector<int> out;
          if (k != 1) {
            out.push_back(wl);
          } else {
            for (int wj = 1; wj <= na; ++wj)
              if ((wj + wl) % 2 == 1) out.push_back(wj);
          }
          return out;
        };
        for (int wx : axis_candidates(kx, ml[0])) {
          const double fx = sine_factor(kx, wx, ml[0]);
          if (fx == 0.0) continue;
          for (int wy : axis_candidates(ky, ml[1])) {
            const double fy = sine_factor(ky, wy, ml[1]);
            if (fy == 0.0) continue;
            trip.emplace_back(basis.index_of(wx, wy), l, c * fx * fy);
          }
        }
      }
    }
  }
  SpMat out(n, n);
  out.setFromTriplets(trip.begin(), trip.end());
  out.makeCompressed();
  return out;
}

GalerkinOperators galerkin_operators(const OperatorSpec& spec, const SineBasis& basis) {
  GalerkinOperators ops;
  ops.basis = basis;
  ops.base = operator_matrix(basis, spec.base.coeff);
  for (const auto& t : spec.terms) ops.terms.push_back(operator_matrix(basis, t.coeff));
  return ops;
}

namespace {
bool is_diagonal(const SpMat& m) {
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it)
      if (it.row() != it.col() && it.value() != 0.0) return false;
  return true;
}
}  // namespace

GalerkinSystem assemble(const OperatorSpec& spec, const GalerkinOperators& ops, const Vec& theta) {
  ellipticity_check(spec, theta);
  GalerkinSystem sys;
  sys.basis = ops.basis;
  sys.theta = theta;
  sys.drift = ops.base;
  for (int i = 0; i < spec.p(); ++i) sys.drift += theta(i) * ops.terms[i];
  sys.drift.prune(0.0);
  sys.diagonal = is_diagonal(sys.drift);
  sys.c_theta = symbols(spec, theta).c;
  return sys;
}

GalerkinSystem galerkin_drift(const OperatorSpec& spec, const Vec& theta, int N) {
  spec.validate();
  if (N < 1) fail(ErrorKind::InvalidConfig, "basis size must be positive");
  const SineBasis basis(spec.dimension, N);
  return assemble(spec, galerkin_operators(spec, basis), theta);
}

double galerkin_entry_quadrature(const SineBasis& basis, const std::vector<double>& coeff, int j, int l,
                                 double tol) {
  const int d = basis.dim();
  const auto idx = multi_indices(d, 2);
  const auto& mj = basis.mode(j);
  const auto& ml = basis.mode(l);
  auto integrate = [&](int panels) {
    const QuadratureRule q = composite_gl(0.0, 1.0, panels, 20);
    double total = 0.0;
    for (size_t a = 0; a < idx.size(); ++a) {
      if (coeff[a] == 0.0) continue;
      const MultiIndex& m = idx[a];
      double prod = 1.0;
      for (int ax = 0; ax < d; ++ax) {
        double s = 0.0;
        for (size_t i = 0; i < q.nodes.size(); ++i)
          s += q.weights[i] * sine_derivative(m.a[ax], ml[ax], q.nodes[i]) *
               sine_derivative(0, mj[ax], q.nodes[i]);
        prod *= s;
      }
      total += coeff[a] * prod;
    }
    return total;
  };
  int panels = 1;
  double prev = integrate(panels);
  while (panels < 1024) {
    panels *= 2;
    const double cur = integrate(panels);
    if (std::abs(cur - prev) <= tol * std::max(1.0, std::abs(cur))) return cur;
    prev = cur;
  }
  return prev;
}

}  // namespace spdeloc
