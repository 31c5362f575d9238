#include "spdeloc/stepper.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <unsupported/Eigen/MatrixFunctions>
#include <vector>

#include "spdeloc/error.hpp"

namespace spdeloc {

namespace {

// Factor with the jitter policy: 1e-12·trace/N added before the first attempt, up to 3 ×10 escalations.
Mat jittered_factor(const Mat& q, int& escalations) {
  const Eigen::Index n = q.rows();
  const double tr = q.trace();
  if (tr == 0.0 && q.isZero(0.0)) {
    escalations = -1;
    return Mat::Zero(n, n);
  }
  double jitter = 1e-12 * tr / static_cast<double>(n);
  for (int k = 0; k <= 3; ++k) {
    Mat m = 0.5 * (q + q.transpose());
    m.diagonal().array() += jitter;
    Eigen::LLT<Mat> llt(m);
    if (llt.info() == Eigen::Success) {
      escalations = k;
      return llt.matrixL();
    }
    jitter *= 10.0;
  }
  fail(ErrorKind::FactorizationFailure, "noise covariance is indefinite beyond the jitter budget");
}

// Σ_{k≥k0} c_k z^{k-k0}/(k+1)! with c_k = 2^k - a.
double series(double z, int k0, double a) {
  double sum = 0.0;
  double zp = 1.0;
  double fact = 1.0;
  for (int k = 1; k <= k0; ++k) fact *= (k + 1);
  for (int k = k0; k < k0 + 40; ++k) {
    const double term = (std::ldexp(1.0, k) - a) * zp / fact;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    zp *= z;
    fact *= (k + 2);
  }
  return sum;
}

// (e^z - 1)/z
double exprel(double z) {
  double sum = 0.0, zp = 1.0, fact = 1.0;
  for (int k = 0; k < 40; ++k) {
    fact *= (k + 1);
    const double term = zp / fact;
    sum += term;
    if (std::abs(term) < 1e-18) break;
    zp *= z;
  }
  return sum;
}

}  // namespace

ScalarOuMoments scalar_ou_moments(double mu, double dt) {
  ScalarOuMoments m;
  const double z = mu * dt;
  m.phi = std::exp(z);
  double f1z, f12z, g12, g22;
  if (std::abs(z) < 0.5) {
    f1z = exprel(z);
    f12z = exprel(2.0 * z);
    g12 = series(z, 1, 1.0);  // (f1(2z) - f1(z)) / z
    g22 = series(z, 2, 2.0);  // (f1(2z) - 2 f1(z) + 1) / z²
  } else {
    f1z = std::expm1(z) / z;
    f12z = std::expm1(2.0 * z) / (2.0 * z);
    g12 = (f12z - f1z) / z;
    g22 = (f12z - 2.0 * f1z + 1.0) / (z * z);
  }
  m.psi = dt * f1z;
  m.v11 = dt * f12z;
  m.v12 = dt * dt * g12;
  m.v22 = dt * dt * dt * g22;
  return m;
}

Stepper build_stepper(const Mat& b, double dt, bool with_integrals, double noise_scale) {
  if (!(dt > 0.0)) fail(ErrorKind::InvalidConfig, "step size must be positive");
  const Eigen::Index n = b.rows();
  Stepper s;
  s.dt = dt;
  s.noise_scale = noise_scale;
  s.with_integrals = with_integrals;
  // Van Loan blocks lose everything to cancellation once exp(-Bᵀdt) is large; stiff systems
  // take Q from B Q + Q Bᵀ = φφᵀ - I instead.
  const bool stiff = (b * dt).cwiseAbs().colwise().sum().maxCoeff() > 2.0;
  bool lyapunov = false;
  if (stiff) {
    s.phi = (b * dt).exp();
    const Mat rhs = Mat::Identity(n, n) - s.phi * s.phi.transpose();
    lyapunov = solve_lyapunov(b, rhs, s.q);
    if (lyapunov) s.q = 0.5 * (s.q + s.q.transpose());
  }
  if (!lyapunov) {
    Mat aug = Mat::Zero(2 * n, 2 * n);
    aug.topLeftCorner(n, n) = b * dt;
    aug.topRightCorner(n, n) = Mat::Identity(n, n) * dt;
    aug.bottomRightCorner(n, n) = -b.transpose() * dt;
    const Mat e = aug.exp();
    s.phi = e.topLeftCorner(n, n);
    s.q = e.topRightCorner(n, n) * s.phi.transpose();
    s.q = 0.5 * (s.q + s.q.transpose());
  }
  s.factor = noise_scale * jittered_factor(s.q, s.jitter_escalations);
  if (with_integrals) {
    // z = (x, S): dz = [[B, 0], [I, 0]] z dt + [I; 0] dβ
    const Eigen::Index m = 2 * n;
    Mat ba = Mat::Zero(m, m);
    ba.topLeftCorner(n, n) = b;
    ba.bottomLeftCorner(n, n) = Mat::Identity(n, n);
    Mat qa;
    if (lyapunov) {
      s.psi = (ba * dt).exp().bottomLeftCorner(n, n);
      // S = B^{-1}(x - β(dt)), Cov(x, β(dt)) = ψ
      const Eigen::PartialPivLU<Mat> lu(b);
      const Mat binv = lu.inverse();
      const Mat c = (s.q - s.psi) * binv.transpose();
      Mat v = binv * (s.q - s.psi - s.psi.transpose() + dt * Mat::Identity(n, n)) * binv.transpose();
      qa.resize(m, m);
      qa << s.q, c, c.transpose(), 0.5 * (v + v.transpose());
    } else {
      Mat g = Mat::Zero(m, m);
      g.topLeftCorner(n, n) = Mat::Identity(n, n);
      Mat aug = Mat::Zero(2 * m, 2 * m);
      aug.topLeftCorner(m, m) = ba * dt;
      aug.topRightCorner(m, m) = g * dt;
      aug.bottomRightCorner(m, m) = -ba.transpose() * dt;
      const Mat e = aug.exp();
      const Mat f11 = e.topLeftCorner(m, m);
      qa = e.topRightCorner(m, m) * f11.transpose();
      qa = 0.5 * (qa + qa.transpose());
      s.psi = f11.bottomLeftCorner(n, n);
    }
    // balance the S block (variance ~dt³) against the x block (~dt) before factorizing
    Vec scale = Vec::Ones(m);
    scale.tail(n).setConstant(1.0 / dt);
    const Mat qs = scale.asDiagonal() * qa * scale.asDiagonal();
    int esc = -1;
    const Mat ls = jittered_factor(qs, esc);
    s.joint_factor = noise_scale * (scale.cwiseInverse().asDiagonal() * ls);
  }
  return s;
}

Stepper build_stepper(const GalerkinSystem& system, double dt, bool with_integrals, double noise_scale) {
  return build_stepper(system.dense(), dt, with_integrals, noise_scale);
}

DiagonalStepper build_diagonal_stepper(const Vec& mu, double dt, double noise_scale) {
  if (!(dt > 0.0)) fail(ErrorKind::InvalidConfig, "step size must be positive");
  const Eigen::Index n = mu.size();
  DiagonalStepper s;
  s.dt = dt;
  s.noise_scale = noise_scale;
  s.mu = mu;
  s.phi.resize(n);
  s.psi.resize(n);
  s.l11.resize(n);
  s.l21.resize(n);
  s.l22.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const ScalarOuMoments m = scalar_ou_moments(mu(j), dt);
    s.phi(j) = m.phi;
    s.psi(j) = m.psi;
    const double l11 = std::sqrt(m.v11);
    const double l21 = m.v12 / l11;
    const double l22 = std::sqrt(std::max(m.v22 - l21 * l21, 0.0));
    s.l11(j) = noise_scale * l11;
    s.l21(j) = noise_scale * l21;
    s.l22(j) = noise_scale * l22;
  }
  return s;
}

Mat stationary_covariance(const Mat& b) {
  Mat s;
  if (!solve_lyapunov(b, Mat::Identity(b.rows(), b.cols()), s))
    fail(ErrorKind::NotDissipative, "drift matrix has an eigenvalue with nonnegative real part");
  return s;
}

Vec sample_initial(const GalerkinSystem& system, InitialMode mode, const NormalStream& rng, double noise_scale) {
  const int n = system.size();
  if (mode == InitialMode::Zero) return Vec::Zero(n);
  std::vector<double> z(n);
  rng.fill(0, z.data(), z.size());
  const Eigen::Map<const Vec> zv(z.data(), n);
  if (system.diagonal) {
    const Vec mu = system.diag();
    if ((mu.array() >= 0.0).any())
      fail(ErrorKind::NotDissipative, "diagonal drift has a nonnegative entry");
    return noise_scale * ((-0.5 / mu.array()).sqrt() * zv.array()).matrix();
  }
  return noise_scale * (stationary_factor(system) * zv);
}

Mat stationary_factor(const GalerkinSystem& system) {
  int esc = -1;
  return jittered_factor(stationary_covariance(system.dense()), esc);
}

CoefficientTrajectory simulate_path(const Stepper& stepper, const Vec& x0, int n_steps, const NormalStream& rng) {
  const int n = stepper.size();
  if (x0.size() != n) fail(ErrorKind::InvalidConfig, "initial state has wrong dimension");
  CoefficientTrajectory tr;
  tr.seed = rng.seed();
  tr.replicate = rng.stream();
  tr.times = Vec::LinSpaced(n_steps + 1, 0.0, n_steps * stepper.dt);
  tr.x.resize(n_steps + 1, n);
  tr.x.row(0) = x0.transpose();
  if (stepper.with_integrals) tr.frame.resize(n_steps, n);
  const int nz = stepper.with_integrals ? 2 * n : n;
  std::vector<double> z(nz);
  Vec cur = x0;
  for (int m = 0; m < n_steps; ++m) {
    rng.fill(static_cast<uint64_t>(m) + 1, z.data(), z.size());
    const Eigen::Map<const Vec> zv(z.data(), nz);
    if (stepper.with_integrals) {
      const Vec noise = stepper.joint_factor * zv;
      const Vec next = stepper.phi * cur + noise.head(n);
      tr.frame.row(m) = (stepper.psi * cur + noise.tail(n)).transpose();
      cur = next;
    } else {
      cur = stepper.phi * cur + stepper.factor * zv;
    }
    tr.x.row(m + 1) = cur.transpose();
  }
  return tr;
}

CoefficientTrajectory simulate_path(const DiagonalStepper& stepper, const Vec& x0, int n_steps,
                                    const NormalStream& rng, bool with_integrals) {
  const int n = stepper.size();
  if (x0.size() != n) fail(ErrorKind::InvalidConfig, "initial state has wrong dimension");
  CoefficientTrajectory tr;
  tr.seed = rng.seed();
  tr.replicate = rng.stream();
  tr.times = Vec::LinSpaced(n_steps + 1, 0.0, n_steps * stepper.dt);
  tr.x.resize(n_steps + 1, n);
  tr.x.row(0) = x0.transpose();
  if (with_integrals) tr.frame.resize(n_steps, n);
  std::vector<double> z(with_integrals ? 2 * n : n);
  Vec cur = x0;
  for (int m = 0; m < n_steps; ++m) {
    rng.fill(static_cast<uint64_t>(m) + 1, z.data(), z.size());
    for (int j = 0; j < n; ++j) {
      const double z1 = z[j];
      if (with_integrals)
        tr.frame(m, j) = stepper.psi(j) * cur(j) + stepper.l21(j) * z1 + stepper.l22(j) * z[n + j];
      cur(j) = stepper.phi(j) * cur(j) + stepper.l11(j) * z1;
    }
    tr.x.row(m + 1) = cur.transpose();
  }
  return tr;
}

void write_trajectory_csv(const CoefficientTrajectory& traj, const std::string& path) {
  std::ofstream os(path);
  if (!os) fail(ErrorKind::InvalidConfig, "cannot open " + path);
  os << std::setprecision(17);
  os << "t";
  for (Eigen::Index j = 0; j < traj.x.cols(); ++j) os << ",x_" << (j + 1);
  os << '\n';
  for (Eigen::Index m = 0; m < traj.x.rows(); ++m) {
    os << traj.times(m);
    for (Eigen::Index j = 0; j < traj.x.cols(); ++j) os << ',' << traj.x(m, j);
    os << '\n';
  }
}

}  // namespace spdeloc
