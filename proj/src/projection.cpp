#include "spdeloc/projection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "spdeloc/error.hpp"
#include "spdeloc/quadrature.hpp"

namespace spdeloc {

namespace {

constexpr int kOrder = 40;

// √2 sin(jπy) for j = 1..n at the nodes, by the three-term recurrence (rows j-1, cols nodes).
Mat sine_table(int n, const std::vector<double>& nodes) {
  const size_t q = nodes.size();
  Mat s(n, q);
  const double r2 = std::numbers::sqrt2;
  for (size_t i = 0; i < q; ++i) {
    const double a = std::numbers::pi * nodes[i];
    const double c2 = 2.0 * std::cos(a);
    double prev = 0.0;
    double cur = std::sin(a);
    for (int j = 0; j < n; ++j) {
      s(j, i) = r2 * cur;
      const double next = c2 * cur - prev;
      prev = cur;
      cur = next;
    }
  }
  return s;
}

struct LocationResult {
  std::vector<Vec> coeffs;  // per channel, in basis order
  std::vector<double> sq_norm;
};

// Coefficients of the channel functions at location k using `panels` panels per axis.
LocationResult project_location(const MeasurementDesign& des, int k, const std::vector<std::vector<double>>& ch,
                                const SineBasis& basis, int panels) {
  const int d = des.d;
  const ScaledKernel sk = des.scaled(k);
  const double r = des.delta * des.kernel->support_radius();
  const int nc = static_cast<int>(ch.size());
  LocationResult out;
  out.coeffs.assign(nc, Vec::Zero(basis.size()));
  out.sq_norm.assign(nc, 0.0);
  if (d == 1) {
    const QuadratureRule q = composite_gl(des.locations[k][0] - r, des.locations[k][0] + r, panels, kOrder);
    const Mat s = sine_table(basis.per_axis(), q.nodes);
    const size_t nq = q.nodes.size();
    for (int c = 0; c < nc; ++c) {
      Vec f(nq);
      double sq = 0.0;
      for (size_t i = 0; i < nq; ++i) {
        const double y[1] = {q.nodes[i]};
        const double v = sk.adjoint_apply(ch[c], y);
        f(i) = q.weights[i] * v;
        sq += q.weights[i] * v * v;
      }
      out.coeffs[c] = s * f;  // wavenumbers 1..N coincide with basis order in d = 1
      out.sq_norm[c] = sq;
    }
    return out;
  }
  if (d != 2) fail(ErrorKind::Unsupported, "projection is implemented for d = 1, 2");
  const QuadratureRule qx = composite_gl(des.locations[k][0] - r, des.locations[k][0] + r, panels, kOrder);
  const QuadratureRule qy = composite_gl(des.locations[k][1] - r, des.locations[k][1] + r, panels, kOrder);
  const Mat sx = sine_table(basis.per_axis(), qx.nodes);
  const Mat sy = sine_table(basis.per_axis(), qy.nodes);
  const size_t nq = qx.nodes.size();
  for (int c = 0; c < nc; ++c) {
    Mat f(nq, nq);
    double sq = 0.0;
    for (size_t i = 0; i < nq; ++i)
      for (size_t j = 0; j < nq; ++j) {
        const double y[2] = {qx.nodes[i], qy.nodes[j]};
        const double v = sk.adjoint_apply(ch[c], y);
        const double w = qx.weights[i] * qy.weights[j];
        f(i, j) = w * v;
        sq += w * v * v;
      }
    const Mat g2 = sx * f * sy.transpose();
    Vec flat(basis.size());
    for (int j = 0; j < basis.size(); ++j) {
      const auto& m = basis.mode(j);
      flat(j) = g2(m[0] - 1, m[1] - 1);
    }
    out.coeffs[c] = flat;
    out.sq_norm[c] = sq;
  }
  return out;
}

std::vector<std::vector<double>> channel_coefficients(const OperatorSpec& spec) {
  std::vector<std::vector<double>> ch;
  std::vector<double> id(multi_indices(spec.dimension, 2).size(), 0.0);
  id[0] = 1.0;
  ch.push_back(id);
  for (const auto& t : spec.terms) ch.push_back(t.coeff);
  ch.push_back(spec.base.coeff);
  return ch;
}

}  // namespace

ProjectionTensor project_kernel(const MeasurementDesign& design, const OperatorSpec& spec, const SineBasis& basis) {
  if (design.d != spec.dimension || basis.dim() != spec.dimension)
    fail(ErrorKind::InvalidConfig, "design, operator and basis dimensions differ");
  for (int k = 0; k < design.M(); ++k) scale_kernel(*design.kernel, design.delta, design.locations[k]);
  const auto ch = channel_coefficients(spec);
  const int nc = static_cast<int>(ch.size());
  ProjectionTensor pt;
  pt.p = spec.p();
  pt.base_zero = spec.base.is_zero();
  pt.g.assign(nc, RowMat::Zero(design.M(), basis.size()));
  pt.tail_energy.assign(nc, 0.0);
  int panels_used = 1;
  double worst_change = 0.0;
  for (int k = 0; k < design.M(); ++k) {
    int panels = 1;
    LocationResult prev = project_location(design, k, ch, basis, panels);
    double change = 0.0;
    while (true) {
      LocationResult cur = project_location(design, k, ch, basis, 2 * panels);
      change = 0.0;
      for (int c = 0; c < nc; ++c) {
        const double scale = std::max(cur.coeffs[c].cwiseAbs().maxCoeff(), 1e-300);
        change = std::max(change, (cur.coeffs[c] - prev.coeffs[c]).cwiseAbs().maxCoeff() / scale);
      }
      panels *= 2;
      prev = std::move(cur);
      if (change <= 1e-9 || panels >= 64) break;
    }
    panels_used = std::max(panels_used, panels);
    worst_change = std::max(worst_change, change);
    for (int c = 0; c < nc; ++c) {
      pt.g[c].row(k) = prev.coeffs[c].transpose();
      if (prev.sq_norm[c] > 0.0) {
        const double tail = 1.0 - prev.coeffs[c].squaredNorm() / prev.sq_norm[c];
        pt.tail_energy[c] = std::max(pt.tail_energy[c], std::max(tail, 0.0));
      }
    }
  }
  pt.panels = panels_used;
  pt.doubling_change = worst_change;
  return pt;
}

Vec project_function(const MeasurementDesign& design, int k, const std::vector<double>& adjoint_coeff,
                     const SineBasis& basis, int panels) {
  return project_location(design, k, {adjoint_coeff}, basis, panels).coeffs[0];
}

MeasurementPath extract_measurements(const CoefficientTrajectory& traj, const ProjectionTensor& proj,
                                     double kernel_norm) {
  const Eigen::Index n = traj.x.cols();
  if (proj.g.empty() || proj.g[0].cols() != n)
    fail(ErrorKind::InvalidConfig, "trajectory and projection sizes differ");
  MeasurementPath mp;
  mp.times = traj.times;
  mp.noise_scale = kernel_norm;
  mp.X = proj.identity() * traj.x.transpose();
  for (int i = 0; i < proj.p; ++i) mp.XA.push_back(proj.term(i) * traj.x.transpose());
  mp.XA0 = proj.base() * traj.x.transpose();
  if (traj.frame.rows() > 0) {
    for (int i = 0; i < proj.p; ++i) mp.SA.push_back(proj.term(i) * traj.frame.transpose());
    mp.SA0 = proj.base() * traj.frame.transpose();
  }
  return mp;
}

void write_measurement_csv(const MeasurementPath& path, const std::string& file) {
  std::ofstream os(file);
  if (!os) fail(ErrorKind::InvalidConfig, "cannot open " + file);
  os << std::setprecision(17);
  const int M = path.M();
  os << "t";
  for (int k = 0; k < M; ++k) os << ",X[" << k + 1 << "]";
  for (int i = 0; i < path.p(); ++i)
    for (int k = 0; k < M; ++k) os << ",X_A[" << i + 1 << "][" << k + 1 << "]";
  for (int k = 0; k < M; ++k) os << ",X_A0[" << k + 1 << "]";
  os << '\n';
  for (Eigen::Index m = 0; m < path.X.cols(); ++m) {
    os << path.times(m);
    for (int k = 0; k < M; ++k) os << ',' << path.X(k, m);
    for (int i = 0; i < path.p(); ++i)
      for (int k = 0; k < M; ++k) os << ',' << path.XA[i](k, m);
    for (int k = 0; k < M; ++k) os << ',' << path.XA0(k, m);
    os << '\n';
  }
}

MeasurementPath read_measurement_csv(const std::string& file, int p, double kernel_norm) {
  std::ifstream is(file);
  if (!is) fail(ErrorKind::InvalidConfig, "cannot open " + file);
  std::string line;
  std::getline(is, line);
  const long cols = std::count(line.begin(), line.end(), ',') + 1;
  if ((cols - 1) % (p + 2) != 0) fail(ErrorKind::InvalidConfig, "column count does not match p");
  const int M = static_cast<int>((cols - 1) / (p + 2));
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> r;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) r.push_back(std::stod(cell));
    if (static_cast<long>(r.size()) != cols) fail(ErrorKind::InvalidConfig, "ragged measurement CSV");
    rows.push_back(std::move(r));
  }
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  MeasurementPath mp;
  mp.noise_scale = kernel_norm;
  mp.times.resize(n);
  mp.X.resize(M, n);
  mp.XA.assign(p, RowMat(M, n));
  mp.XA0.resize(M, n);
  for (Eigen::Index m = 0; m < n; ++m) {
    const auto& r = rows[m];
    mp.times(m) = r[0];
    int c = 1;
    for (int k = 0; k < M; ++k) mp.X(k, m) = r[c++];
    for (int i = 0; i < p; ++i)
      for (int k = 0; k < M; ++k) mp.XA[i](k, m) = r[c++];
    for (int k = 0; k < M; ++k) mp.XA0(k, m) = r[c++];
  }
  return mp;
}

CovarianceModel covariance_model(const GalerkinSystem& system, const ProjectionTensor& proj, double kernel_norm) {
  if (!system.diagonal) fail(ErrorKind::NotSelfAdjoint, "covariance series needs a self-adjoint drift (b_θ = 0)");
  CovarianceModel m;
  m.lambda = -system.diag();
  if ((m.lambda.array() <= 0.0).any()) fail(ErrorKind::NotDissipative, "eigenvalues of -A_θ must be positive");
  m.g = proj.identity();
  const SineBasis& b = system.basis;
  const int edge = b.dim() == 1 ? b.index_of(b.per_axis()) : b.index_of(b.per_axis(), 1);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < m.g.rows(); ++k)
    worst = std::max(worst, kernel_norm * kernel_norm - m.g.row(k).squaredNorm());
  m.tail_bound = std::max(worst, 0.0) / (2.0 * m.lambda(edge));
  return m;
}

double analytic_covariance(const Vec& lambda, const Eigen::Ref<const Vec>& gk, const Eigen::Ref<const Vec>& gl,
                           double t) {
  const double at = std::abs(t);
  double s = 0.0;
  for (Eigen::Index j = 0; j < lambda.size(); ++j) s += gk(j) * gl(j) * std::exp(-lambda(j) * at) / (2.0 * lambda(j));
  return s;
}

double analytic_covariance(const CovarianceModel& model, double t, int k, int l) {
  return analytic_covariance(model.lambda, model.g.row(k).transpose(), model.g.row(l).transpose(), t);
}

}  // namespace spdeloc
