#pragma once

#include <functional>
#include <vector>

namespace spdeloc {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule with n nodes on [-1, 1] (Newton iteration on P_n).
const QuadratureRule& gauss_legendre(int n);

// Composite Gauss-Legendre rule on [a, b] with `panels` equal panels of `order` nodes each.
QuadratureRule composite_gl(double a, double b, int panels, int order);

struct IntegralResult {
  double value = 0.0;
  double change = 0.0;  // difference between the last two panel doublings
  int panels = 0;
};

// Integrates f over [a, b], doubling the panel count until successive values differ by at most
// tol * max(1, |value|).
IntegralResult integrate_doubling(const std::function<double(double)>& f, double a, double b,
                                  double tol = 1e-12, int order = 40, int max_panels = 4096);

}  // namespace spdeloc
