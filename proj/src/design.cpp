#include "spdeloc/design.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spdeloc/error.hpp"
#include "spdeloc/quadrature.hpp"

namespace spdeloc {

namespace {

int axis_capacity(double delta, double margin, double radius) {
  const double reach = delta * radius;
  if (!(reach < 0.5)) return 0;
  if (!(margin > reach)) return 1;  // only the centre fits
  const double len = 1.0 - 2.0 * margin;
  if (len <= 0.0) return 1;
  return std::max(1, static_cast<int>(std::ceil(len / (2.0 * reach))));
}

std::vector<double> axis_points(int m, double margin) {
  std::vector<double> pts(m);
  if (m == 1) {
    pts[0] = 0.5;
    return pts;
  }
  const double len = 1.0 - 2.0 * margin;
  for (int k = 0; k < m; ++k) pts[k] = margin + k * len / (m - 1);
  return pts;
}

double box_inner(const MeasurementDesign& des, int k, int l) {
  const int d = des.d;
  const double r = des.delta * des.kernel->support_radius();
  double lo[3], hi[3];
  for (int i = 0; i < d; ++i) {
    lo[i] = std::max(des.locations[k][i], des.locations[l][i]) - r;
    hi[i] = std::min(des.locations[k][i], des.locations[l][i]) + r;
    if (lo[i] >= hi[i]) return 0.0;
  }
  const ScaledKernel a = des.scaled(k);
  const ScaledKernel b = des.scaled(l);
  auto run = [&](int panels) {
    std::vector<QuadratureRule> q;
    for (int i = 0; i < d; ++i) q.push_back(composite_gl(lo[i], hi[i], panels, 40));
    double s = 0.0;
    double y[3];
    const size_t n = q[0].nodes.size();
    if (d == 1) {
      for (size_t i = 0; i < n; ++i) {
        y[0] = q[0].nodes[i];
        s += q[0].weights[i] * a.value(y) * b.value(y);
      }
    } else if (d == 2) {
      for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
          y[0] = q[0].nodes[i];
          y[1] = q[1].nodes[j];
          s += q[0].weights[i] * q[1].weights[j] * a.value(y) * b.value(y);
        }
    } else {
      for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
          for (size_t m = 0; m < n; ++m) {
            y[0] = q[0].nodes[i];
            y[1] = q[1].nodes[j];
            y[2] = q[2].nodes[m];
            s += q[0].weights[i] * q[1].weights[j] * q[2].weights[m] * a.value(y) * b.value(y);
          }
    }
    return s;
  };
  double prev = run(1);
  for (int p = 2; p <= 32; p *= 2) {
    const double cur = run(p);
    if (std::abs(cur - prev) <= 1e-12 * std::max(1.0, std::abs(cur))) return cur;
    prev = cur;
    if (d == 3 && p >= 4) break;
  }
  return prev;
}

}  // namespace

int design_capacity(int d, double delta, double margin, double support_radius) {
  const int m = axis_capacity(delta, margin, support_radius);
  int c = 1;
  for (int i = 0; i < d; ++i) c *= m;
  return m == 0 ? 0 : c;
}

MeasurementDesign design_grid(int d, std::shared_ptr<const Kernel> kernel, double delta, int M, double margin) {
  if (d != kernel->dim()) fail(ErrorKind::InvalidConfig, "kernel dimension does not match the design");
  if (M < 1) fail(ErrorKind::InvalidConfig, "M must be positive");
  if (!(delta > 0.0)) fail(ErrorKind::InvalidConfig, "δ must be positive");
  const int cap = design_capacity(d, delta, margin, kernel->support_radius());
  if (M > cap) {
    std::ostringstream os;
    os << "M=" << M << " exceeds the packing capacity " << cap << " at δ=" << delta << ", margin=" << margin;
    fail(ErrorKind::Infeasible, os.str());
  }
  MeasurementDesign des;
  des.d = d;
  des.delta = delta;
  des.margin = margin;
  des.kernel = std::move(kernel);
  if (d == 1) {
    for (double x : axis_points(M, margin)) des.locations.push_back({x, 0.0, 0.0});
  } else if (d == 2) {
    const int mx = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(M))));
    const int my = (M + mx - 1) / mx;
    const auto px = axis_points(mx, margin);
    const auto py = axis_points(my, margin);
    for (int i = 0; i < mx && des.M() < M; ++i)
      for (int j = 0; j < my && des.M() < M; ++j) des.locations.push_back({px[i], py[j], 0.0});
  } else {
    const int m = static_cast<int>(std::ceil(std::cbrt(static_cast<double>(M))));
    const auto px = axis_points(m, margin);
    for (int i = 0; i < m && des.M() < M; ++i)
      for (int j = 0; j < m && des.M() < M; ++j)
        for (int k = 0; k < m && des.M() < M; ++k) des.locations.push_back({px[i], px[j], px[k]});
  }
  for (int k = 0; k < des.M(); ++k) scale_kernel(*des.kernel, delta, des.locations[k]);
  return des;
}

double packing_sum(const MeasurementDesign& design, int k, double p) {
  double s = 0.0;
  for (int l = 0; l < design.M(); ++l) {
    if (l == k) continue;
    double r2 = 0.0;
    for (int i = 0; i < design.d; ++i) r2 += std::pow(design.locations[k][i] - design.locations[l][i], 2);
    s += std::pow(r2, -0.5 * p);
  }
  return s;
}

Mat design_gram(const MeasurementDesign& design) {
  const int M = design.M();
  Mat g(M, M);
  for (int k = 0; k < M; ++k)
    for (int l = k; l < M; ++l) g(k, l) = g(l, k) = box_inner(design, k, l);
  return g;
}

}  // namespace spdeloc
