#include "spdeloc/inference.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "spdeloc/error.hpp"
#include "spdeloc/sigma.hpp"
#include "spdeloc/stats.hpp"

namespace spdeloc {

InferenceConfig InferenceConfig::make(double alpha, int p) {
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::InvalidConfig, "α must lie in (0, 1)");
  if (p < 1) fail(ErrorKind::InvalidConfig, "p must be positive");
  InferenceConfig c;
  c.alpha = alpha;
  c.p = p;
  c.q = chi2_quantile(1.0 - alpha, p);
  c.z = normal_quantile(1.0 - alpha);
  return c;
}

Membership confidence_set_membership(const Vec& theta, const EstimateReport& report, const InferenceConfig& cfg) {
  if (theta.size() != report.theta_hat.size()) fail(ErrorKind::InvalidConfig, "θ has the wrong length");
  const Vec e = report.theta_hat - theta;
  const double kn2 = report.kernel_norm * report.kernel_norm;
  Membership m;
  m.statistic = e.dot(report.info * e) / kn2;
  m.inside = m.statistic <= cfg.q;
  return m;
}

ReactionModel reaction_model(const Kernel& k, double T, int M, double delta) {
  ReactionModel m;
  m.d = k.dim();
  m.T = T;
  m.M = M;
  m.delta = delta;
  const double kn2 = k.norm() * k.norm();
  m.negative_sobolev_total = M * delta * delta * fourier_norm_sq(k, -0.5) / kn2;
  return m;
}

ReactionTest reaction_test(const EstimateReport& report, const InferenceConfig& cfg, const ReactionModel& model) {
  const int p = static_cast<int>(report.theta_hat.size());
  if (model.reaction_index >= p || model.diffusion_index >= p)
    fail(ErrorKind::InvalidConfig, "reaction test indices exceed p");
  ReactionTest r;
  const double th1 = report.theta_hat(model.diffusion_index);
  const double th3 = report.theta_hat(model.reaction_index);
  r.invalid_regime = model.d <= 2;
  if (r.invalid_regime) r.note = "InvalidRegime: ‖(-Δ)^{-1/2}K‖ is infinite on R^d for d ≤ 2; domain value used";
  if (!(th1 > 0.0)) {
    r.note += r.note.empty() ? "" : "; ";
    r.note += "non-positive diffusivity estimate";
    r.statistic = std::nan("");
  } else {
    r.statistic = std::sqrt(model.T * model.negative_sobolev_total / (2.0 * th1)) * th3;
  }
  r.reject = std::abs(r.statistic) > cfg.z;
  r.reject_one_sided = r.statistic < -cfg.z;
  const Mat inv = report.info.ldlt().solve(Mat::Identity(p, p));
  const double v = inv(model.reaction_index, model.reaction_index);
  r.info_statistic = v > 0.0 ? th3 / (report.kernel_norm * std::sqrt(v)) : std::nan("");
  r.reject_info = r.info_statistic < -cfg.z;
  return r;
}

RateBand binomial_band(double nominal, int reps, double width) {
  const double se = std::sqrt(nominal * (1.0 - nominal) / std::max(reps, 1));
  return {std::max(0.0, nominal - width * se), std::min(1.0, nominal + width * se)};
}

std::string coverage_csv_header() { return "delta,M,reps,coverage,ci_low,ci_high"; }

std::string coverage_csv_row(double delta, int M, int reps, double coverage, const RateBand& band) {
  std::ostringstream os;
  os << std::setprecision(10) << delta << ',' << M << ',' << reps << ',' << coverage << ',' << band.low << ','
     << band.high;
  return os.str();
}

}  // namespace spdeloc
