#include "spdeloc/rkhs.hpp"

#include <algorithm>
#include <cmath>

#include "spdeloc/error.hpp"
#include "spdeloc/stepper.hpp"

namespace spdeloc {

SampledFunction SampledFunction::from_function(const std::function<double(double)>& f,
                                               const std::function<double(double)>& df, double T, int points) {
  if (points < 3 || !(T > 0.0)) fail(ErrorKind::InvalidConfig, "sampled function needs ≥ 3 points on [0, T], T > 0");
  SampledFunction s;
  s.T = T;
  s.h.resize(points);
  s.dh.resize(points);
  s.analytic_derivative = true;
  const double dt = T / (points - 1);
  for (int i = 0; i < points; ++i) {
    s.h(i) = f(i * dt);
    s.dh(i) = df(i * dt);
  }
  return s;
}

namespace {

Vec second_order_derivative(const Vec& h, double dt) {
  const Eigen::Index n = h.size();
  Vec d(n);
  for (Eigen::Index i = 1; i + 1 < n; ++i) d(i) = (h(i + 1) - h(i - 1)) / (2.0 * dt);
  d(0) = (-3.0 * h(0) + 4.0 * h(1) - h(2)) / (2.0 * dt);
  d(n - 1) = (3.0 * h(n - 1) - 4.0 * h(n - 2) + h(n - 3)) / (2.0 * dt);
  return d;
}

}  // namespace

SampledFunction SampledFunction::from_values(const Vec& values, double T) {
  if (values.size() < 3 || !(T > 0.0)) fail(ErrorKind::InvalidConfig, "sampled function needs ≥ 3 points on [0, T], T > 0");
  SampledFunction s;
  s.T = T;
  s.h = values;
  const double dt = T / (values.size() - 1);
  s.dh = second_order_derivative(values, dt);
  // error of an order-2 stencil: |D_h - D_2h| / 3 on the points shared by both grids
  if (values.size() >= 7) {
    Vec coarse(values.size() / 2 + (values.size() % 2));
    for (Eigen::Index i = 0; i < coarse.size(); ++i) coarse(i) = values(2 * i);
    const Vec dc = second_order_derivative(coarse, 2.0 * dt);
    double err = 0.0;
    for (Eigen::Index i = 0; i < dc.size() && 2 * i < s.dh.size(); ++i) err = std::max(err, std::abs(dc(i) - s.dh(2 * i)));
    s.derivative_error = err / 3.0;
  }
  return s;
}

double trapezoid(const Vec& f, double dt) {
  const Eigen::Index n = f.size();
  if (n < 2) return 0.0;
  return dt * (f.sum() - 0.5 * (f(0) + f(n - 1)));
}

double ou_rkhs_norm(const SampledFunction& h, double lambda) {
  if (!(lambda > 0.0)) fail(ErrorKind::InvalidConfig, "λ must be positive");
  const double dt = h.dt();
  const double end = h.h(h.points() - 1);
  return lambda * lambda * trapezoid(h.h.array().square().matrix(), dt) +
         lambda * (end * end + h.h(0) * h.h(0)) + trapezoid(h.dh.array().square().matrix(), dt);
}

double ou_rkhs_inner(const SampledFunction& f, const SampledFunction& g, double lambda) {
  if (f.points() != g.points() || f.T != g.T) fail(ErrorKind::InvalidConfig, "grids differ");
  SampledFunction s = f, d = f;
  s.h = f.h + g.h;
  s.dh = f.dh + g.dh;
  d.h = f.h - g.h;
  d.dh = f.dh - g.dh;
  return 0.25 * (ou_rkhs_norm(s, lambda) - ou_rkhs_norm(d, lambda));
}

SpdeNorm spde_rkhs_norm(const std::vector<SampledFunction>& modes, const Vec& lambda) {
  if (static_cast<Eigen::Index>(modes.size()) != lambda.size())
    fail(ErrorKind::InvalidConfig, "one λ per mode required");
  SpdeNorm r;
  if (modes.empty()) return r;
  const int n = modes[0].points();
  const double T = modes[0].T;
  for (const auto& m : modes)
    if (m.points() != n || m.T != T) fail(ErrorKind::InvalidConfig, "modes must share one grid");
  for (size_t j = 0; j < modes.size(); ++j) r.series += ou_rkhs_norm(modes[j], lambda(j));

  // closed form with A = -diag(λ) acting across modes at each time
  const Eigen::Index J = lambda.size();
  Mat H(J, n), D(J, n);
  for (Eigen::Index j = 0; j < J; ++j) {
    H.row(j) = modes[j].h.transpose();
    D.row(j) = modes[j].dh.transpose();
  }
  const Mat AH = (-lambda).asDiagonal() * H;
  const double dt = modes[0].dt();
  const Vec ah2 = AH.colwise().squaredNorm().transpose();
  const Vec d2 = D.colwise().squaredNorm().transpose();
  const Vec sq = lambda.cwiseSqrt();
  r.closed_form = trapezoid(ah2, dt) + trapezoid(d2, dt) + sq.cwiseProduct(H.col(0)).squaredNorm() +
                  sq.cwiseProduct(H.col(n - 1)).squaredNorm();
  return r;
}

BoundCheck rkhs_bound_check(const std::vector<SampledFunction>& modes, const Vec& lambda, double tol) {
  BoundCheck b;
  if (modes.empty()) return b;
  if (modes[0].T < 1.0) fail(ErrorKind::InvalidConfig, "the bound requires T ≥ 1");
  b.norm = spde_rkhs_norm(modes, lambda).series;
  double ah = 0.0, h2 = 0.0, d2 = 0.0;
  for (size_t j = 0; j < modes.size(); ++j) {
    const double dt = modes[j].dt();
    const double l2 = trapezoid(modes[j].h.array().square().matrix(), dt);
    ah += lambda(j) * lambda(j) * l2;
    h2 += l2;
    d2 += trapezoid(modes[j].dh.array().square().matrix(), dt);
  }
  b.bound = 3.0 * ah + h2 + 2.0 * d2;
  b.holds = b.norm <= b.bound + tol * std::max(1.0, b.bound);
  return b;
}

namespace {

void sums(const std::vector<SampledFunction>& h, double& h2, double& d2) {
  h2 = d2 = 0.0;
  for (const auto& f : h) {
    h2 += trapezoid(f.h.array().square().matrix(), f.dt());
    d2 += trapezoid(f.dh.array().square().matrix(), f.dt());
  }
}

}  // namespace

double measurement_rkhs_bound(const Mat& gram, const Mat& gram_a, const std::vector<SampledFunction>& h) {
  if (gram.rows() != static_cast<Eigen::Index>(h.size())) fail(ErrorKind::InvalidConfig, "one function per measurement");
  const double cond = sym_condition(gram);
  if (!(cond < 1e12)) fail(ErrorKind::SingularGram, "Gram matrix is singular or numerically degenerate");
  const Mat ginv = gram.ldlt().solve(Mat::Identity(gram.rows(), gram.cols()));
  const double gi = op_norm(ginv);
  const double ga = op_norm(gram_a);
  double h2, d2;
  sums(h, h2, d2);
  return (3.0 * gi * gi * ga + gi) * h2 + 2.0 * gi * d2;
}

double laplace_measurement_bound(double delta, double laplacian_norm, const std::vector<SampledFunction>& h) {
  double h2, d2;
  sums(h, h2, d2);
  return 4.0 * std::pow(delta, -4) * laplacian_norm * laplacian_norm * h2 + 2.0 * d2;
}

GaussianPairTruncation GaussianPairTruncation::make(const Mat& c0, const Mat& c1) {
  if (c0.rows() != c0.cols() || c1.rows() != c1.cols() || c0.rows() != c1.rows())
    fail(ErrorKind::InvalidConfig, "covariances must be square and of equal size");
  GaussianPairTruncation p;
  p.c0 = 0.5 * (c0 + c0.transpose());
  p.c1 = 0.5 * (c1 + c1.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(p.c0);
  p.sigma2 = es.eigenvalues();
  p.u = es.eigenvectors();
  const double tr = p.c0.trace();
  if (!(p.sigma2(0) > 1e-12 * tr)) fail(ErrorKind::Degenerate, "C0 has a (numerically) zero eigenvalue");
  return p;
}

namespace {

double log_det_pd(const Mat& c, const char* what) {
  Eigen::SelfAdjointEigenSolver<Mat> es(c, Eigen::EigenvaluesOnly);
  const Vec ev = es.eigenvalues();
  if (!(ev(0) > 1e-12 * std::max(ev.sum(), 0.0))) fail(ErrorKind::Degenerate, std::string(what) + " is singular");
  return ev.array().log().sum();
}

}  // namespace

double hellinger_gaussian(const Mat& c0, const Mat& c1) {
  const double l0 = log_det_pd(0.5 * (c0 + c0.transpose()), "C0");
  const double l1 = log_det_pd(0.5 * (c1 + c1.transpose()), "C1");
  const double lm = log_det_pd(0.25 * (c0 + c0.transpose() + c1 + c1.transpose()), "(C0+C1)/2");
  const double log_bc = 0.25 * (l0 + l1) - 0.5 * lm;
  // 2 - 2e^x computed as -2 expm1(x) to keep small distances accurate
  return std::clamp(-2.0 * std::expm1(log_bc), 0.0, 2.0);
}

double hellinger_gaussian(const GaussianPairTruncation& pair) { return hellinger_gaussian(pair.c0, pair.c1); }

LowerBound lower_bound_condition(const GaussianPairTruncation& pair) {
  LowerBound r;
  const Vec inv_s = pair.sigma2.cwiseSqrt().cwiseInverse();
  const Mat w = inv_s.asDiagonal() * (pair.u.transpose() * (pair.c1 - pair.c0) * pair.u) * inv_s.asDiagonal();
  r.s_value = w.squaredNorm();
  r.certified = r.s_value <= 0.5;
  r.hellinger = hellinger_gaussian(pair);
  r.consistent = !r.certified || r.hellinger <= 1.0;
  return r;
}

Mat measurement_covariance(const GalerkinSystem& system, const RowMat& g, double dt, int n) {
  if (n < 1 || !(dt > 0.0)) fail(ErrorKind::InvalidConfig, "time grid needs n ≥ 1 and dt > 0");
  const int M = static_cast<int>(g.rows());
  const Mat gd = g;
  std::vector<Mat> blocks(n);
  if (system.diagonal) {
    const Vec mu = system.diag();
    if ((mu.array() >= 0.0).any()) fail(ErrorKind::NotDissipative, "drift eigenvalues must be negative");
    const Vec var = (-0.5 * mu.array().inverse()).matrix();
    const Vec phi = (mu * dt).array().exp().matrix();
    Vec cur = var;
    for (int r = 0; r < n; ++r) {
      blocks[r] = gd * cur.asDiagonal() * gd.transpose();
      cur = cur.cwiseProduct(phi);
    }
  } else {
    const Mat b = system.dense();
    const Mat sinf = stationary_covariance(b);
    const Mat phi = build_stepper(b, dt).phi;
    Mat cur = sinf;
    for (int r = 0; r < n; ++r) {
      blocks[r] = gd * cur * gd.transpose();
      cur = phi * cur;
    }
  }
  Mat c(n * M, n * M);
  for (int m = 0; m < n; ++m)
    for (int mp = 0; mp <= m; ++mp) {
      const Mat& blk = blocks[m - mp];  // Cov(Y(t_m), Y(t_mp))
      c.block(m * M, mp * M, M, M) = blk;
      c.block(mp * M, m * M, M, M) = blk.transpose();
    }
  return c;
}

double truncation_trace_bound(const GalerkinSystem& system, const ProjectionTensor& proj, double kernel_norm) {
  const RowMat& g = proj.identity();
  double worst = 0.0;
  for (Eigen::Index k = 0; k < g.rows(); ++k)
    worst = std::max(worst, kernel_norm * kernel_norm - g.row(k).squaredNorm());
  // smallest dissipation rate among omitted modes is at least that of the last retained one
  const Vec d = system.diag();
  const double rate = -d(d.size() - 1);
  if (!(rate > 0.0)) fail(ErrorKind::NotDissipative, "last retained mode is not dissipative");
  return std::max(worst, 0.0) / (2.0 * rate);
}

}  // namespace spdeloc
