#include "spdeloc/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace spdeloc {

namespace {

QuadratureRule build_gl(int n) {
  QuadratureRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  return r;
}

}  // namespace

const QuadratureRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_gl(n)).first;
  return it->second;
}

QuadratureRule composite_gl(double a, double b, int panels, int order) {
  const QuadratureRule& ref = gauss_legendre(order);
  QuadratureRule r;
  r.nodes.reserve(static_cast<size_t>(panels) * order);
  r.weights.reserve(static_cast<size_t>(panels) * order);
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (int i = 0; i < order; ++i) {
      r.nodes.push_back(mid + 0.5 * h * ref.nodes[i]);
      r.weights.push_back(0.5 * h * ref.weights[i]);
    }
  }
  return r;
}

IntegralResult integrate_doubling(const std::function<double(double)>& f, double a, double b,
                                  double tol, int order, int max_panels) {
  auto eval = [&](int panels) {
    const QuadratureRule q = composite_gl(a, b, panels, order);
    double s = 0.0;
    for (size_t i = 0; i < q.nodes.size(); ++i) s += q.weights[i] * f(q.nodes[i]);
    return s;
  };
  IntegralResult out;
  int panels = 1;
  double prev = eval(panels);
  while (true) {
    const int next = panels * 2;
    const double cur = eval(next);
    out.value = cur;
    out.change = std::abs(cur - prev);
    out.panels = next;
    if (out.change <= tol * std::max(1.0, std::abs(cur)) || next >= max_panels) break;
    prev = cur;
    panels = next;
  }
  return out;
}

}  // namespace spdeloc
