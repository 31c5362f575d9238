#include "spdeloc/estimator.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "spdeloc/error.hpp"

namespace spdeloc {

const char* to_string(Scheme s) { return s == Scheme::Pointwise ? "pointwise" : "exact_drift"; }

void SufficientStatistics::reset(int p_, bool frames) {
  p = p_;
  M = 0;
  steps = 0;
  dt = 0.0;
  info_pt = Mat::Zero(p, p);
  ito_pt = Vec::Zero(p);
  corr_pt = Vec::Zero(p);
  has_frames = frames;
  cross = Mat::Zero(p, p);
  left = Mat::Zero(p, p);
  corr_exact = Vec::Zero(p);
}

void SufficientStatistics::merge(const SufficientStatistics& o) {
  info_pt += o.info_pt;
  ito_pt += o.ito_pt;
  corr_pt += o.corr_pt;
  cross += o.cross;
  left += o.left;
  corr_exact += o.corr_exact;
}

SufficientStatistics accumulate(const MeasurementPath& path) {
  const int p = path.p();
  const int M = path.M();
  const int n = path.steps();
  if (n < 1) fail(ErrorKind::InvalidConfig, "measurement path needs at least one step");
  SufficientStatistics st;
  st.reset(p, path.has_frames());
  st.M = M;
  st.steps = n;
  st.dt = path.dt();
  const double dt = st.dt;
  Vec a(p), sa(p);
  for (int k = 0; k < M; ++k) {
    for (int m = 0; m <= n; ++m) {
      for (int i = 0; i < p; ++i) a(i) = path.XA[i](k, m);
      const double w = (m == 0 || m == n) ? 0.5 * dt : dt;
      st.info_pt.noalias() += w * a * a.transpose();
      st.corr_pt += w * path.XA0(k, m) * a;
      if (m < n) {
        const double dx = path.X(k, m + 1) - path.X(k, m);
        st.ito_pt += dx * a;
        if (st.has_frames) {
          for (int i = 0; i < p; ++i) sa(i) = path.SA[i](k, m);
          st.cross.noalias() += a * sa.transpose();
          st.left.noalias() += dt * a * a.transpose();
          st.corr_exact += path.SA0(k, m) * a;
        }
      }
    }
  }
  return st;
}

Mat observed_fisher(const MeasurementPath& path) {
  const int p = path.p();
  const int n = path.steps();
  const double dt = path.dt();
  Mat info = Mat::Zero(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j) {
      double s = 0.0;
      for (int k = 0; k < path.M(); ++k) {
        const auto ai = path.XA[i].row(k);
        const auto aj = path.XA[j].row(k);
        double v = ai.dot(aj);
        v -= 0.5 * (ai(0) * aj(0) + ai(n) * aj(n));
        s += v * dt;
      }
      info(i, j) = info(j, i) = s;
    }
  return info;
}

EstimateReport estimate(const SufficientStatistics& st, const EstimatorOptions& opt) {
  if (opt.scheme == Scheme::ExactDrift && !st.has_frames)
    fail(ErrorKind::InvalidConfig, "exact-drift scheme needs step integrals in the path");
  EstimateReport r;
  r.scheme = opt.scheme;
  r.dt = st.dt;
  r.T = st.T();
  r.M = st.M;
  r.info_pointwise = st.info_pt;
  const Vec rhs_pt = opt.correction ? Vec(st.ito_pt - st.corr_pt) : st.ito_pt;
  Mat info;
  if (opt.scheme == Scheme::ExactDrift) {
    const double cl = sym_condition(st.left);
    info = cl <= opt.condition_cap ? Mat(st.cross.transpose() * st.left.ldlt().solve(st.cross)) : st.left;
    info = 0.5 * (info + info.transpose());
  } else {
    info = st.info_pt;
  }
  r.info = info;
  r.condition = sym_condition(info);
  if (!(r.condition <= opt.condition_cap)) {
    r.flagged = true;
    std::ostringstream os;
    os << "condition number " << r.condition << " exceeds cap " << opt.condition_cap;
    r.flag_reason = os.str();
    if (opt.throw_on_singular) fail(ErrorKind::SingularInformation, r.flag_reason);
    r.theta_hat = Vec::Constant(st.p, std::nan(""));
    r.theta_pointwise = r.theta_hat;
    return r;
  }
  if (opt.scheme == Scheme::ExactDrift) {
    const Vec rhs = opt.correction ? Vec(st.ito_pt - st.corr_exact) : st.ito_pt;
    r.theta_hat = st.cross.fullPivLu().solve(rhs);
    r.theta_pointwise = st.info_pt.ldlt().solve(rhs_pt);
  } else {
    r.theta_hat = st.info_pt.ldlt().solve(rhs_pt);
    r.theta_pointwise = r.theta_hat;
  }
  return r;
}

EstimateReport augmented_mle(const MeasurementPath& path, const EstimatorOptions& opt) {
  EstimateReport r = estimate(accumulate(path), opt);
  r.kernel_norm = path.noise_scale;
  return r;
}

Mat rate_matrix(double delta, int M, const std::vector<int>& orders) {
  if (!(delta > 0.0) || M < 1) fail(ErrorKind::InvalidConfig, "rate matrix needs δ > 0 and M ≥ 1");
  const int p = static_cast<int>(orders.size());
  Mat rho = Mat::Zero(p, p);
  for (int i = 0; i < p; ++i) rho(i, i) = std::pow(static_cast<double>(M), -0.5) * std::pow(delta, orders[i] - 1);
  return rho;
}

Vec standardized_error(const EstimateReport& report, const Vec& theta_true) {
  if (report.flagged || report.rho.size() == 0)
    fail(ErrorKind::SingularInformation, "report has no usable information matrix or rate matrix");
  const Mat& rho = report.rho;
  const Mat scaled = rho * report.info * rho;
  const Vec rinv_err = rho.diagonal().cwiseInverse().asDiagonal() * (report.theta_hat - theta_true);
  return sym_sqrt(scaled) * rinv_err;
}

std::string report_csv_header(int p) {
  std::ostringstream os;
  os << "scheme,delta,M,N,dt,T,kernel_norm";
  for (int i = 0; i < p; ++i) os << ",theta_hat_" << i + 1;
  for (int i = 0; i < p; ++i) os << ",theta_pointwise_" << i + 1;
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j) os << ",info_" << i + 1 << j + 1;
  for (int i = 0; i < p; ++i) os << ",rho_" << i + 1;
  for (int i = 0; i < p; ++i) os << ",std_error_" << i + 1;
  os << ",condition,flagged,quadrature";
  return os.str();
}

std::string report_csv_row(const EstimateReport& r) {
  std::ostringstream os;
  os << std::setprecision(12);
  const int p = static_cast<int>(r.theta_hat.size());
  os << to_string(r.scheme) << ',' << r.delta << ',' << r.M << ',' << r.N << ',' << r.dt << ',' << r.T << ','
     << r.kernel_norm;
  for (int i = 0; i < p; ++i) os << ',' << r.theta_hat(i);
  for (int i = 0; i < p; ++i) os << ',' << (r.theta_pointwise.size() == p ? r.theta_pointwise(i) : std::nan(""));
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j) os << ',' << r.info(i, j);
  for (int i = 0; i < p; ++i) os << ',' << (r.rho.size() ? r.rho(i, i) : std::nan(""));
  for (int i = 0; i < p; ++i) os << ',' << (r.std_error.size() == p ? r.std_error(i) : std::nan(""));
  os << ',' << r.condition << ',' << (r.flagged ? 1 : 0) << ',' << '"' << r.quadrature << '"';
  return os.str();
}

std::string report_summary(const EstimateReport& r) {
  std::ostringstream os;
  os << std::setprecision(6);
  os << "augmented MLE (" << to_string(r.scheme) << " scheme)\n";
  os << "  delta=" << r.delta << " M=" << r.M << " N=" << r.N << " dt=" << r.dt << " T=" << r.T << '\n';
  os << "  theta_hat =";
  for (Eigen::Index i = 0; i < r.theta_hat.size(); ++i) os << ' ' << r.theta_hat(i);
  os << "\n  condition(I) = " << r.condition << (r.flagged ? "  [flagged: " + r.flag_reason + "]" : "") << '\n';
  os << "  information:\n";
  for (Eigen::Index i = 0; i < r.info.rows(); ++i) {
    os << "   ";
    for (Eigen::Index j = 0; j < r.info.cols(); ++j) os << ' ' << r.info(i, j);
    os << '\n';
  }
  if (r.std_error.size()) {
    os << "  standardized error =";
    for (Eigen::Index i = 0; i < r.std_error.size(); ++i) os << ' ' << r.std_error(i);
    os << '\n';
  }
  if (!r.quadrature.empty()) os << "  quadrature: " << r.quadrature << '\n';
  return os.str();
}

}  // namespace spdeloc
