#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>

#include "spdeloc/error.hpp"
#include "spdeloc/montecarlo.hpp"
#include "spdeloc/projection.hpp"

using namespace spdeloc;

namespace {

double gk(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 8, 1e-13);
}

Vec v(std::initializer_list<double> x) {
  Vec r(x.size());
  int i = 0;
  for (double e : x) r(i++) = e;
  return r;
}

std::shared_ptr<const Kernel> bump(int d) { return std::make_shared<const Kernel>(Kernel::bump(d)); }

}  // namespace

TEST(Projection, IdentityRowAgainstQuadrature) {
  const MeasurementDesign des = design_grid(1, bump(1), 0.05, 4, 0.1);
  const SineBasis basis(1, 80);
  const ProjectionTensor pt = project_kernel(des, OperatorSpec::heat(1), basis);
  for (int k = 0; k < des.M(); ++k) {
    const ScaledKernel sk = des.scaled(k);
    const double x = des.locations[k][0];
    for (int j : {1, 2, 7, 20, 41, 80}) {
      const double oracle = gk(
          [&](double y) { return sk.value(&y) * std::sqrt(2.0) * std::sin(j * M_PI * y); }, x - 0.05, x + 0.05);
      EXPECT_NEAR(pt.identity()(k, j - 1), oracle, 1e-11) << "k=" << k << " j=" << j;
    }
  }
  // tail energy is the normalized energy missing from the basis
  const double n2 = des.kernel->norm() * des.kernel->norm();
  double worst = 0.0;
  for (int k = 0; k < des.M(); ++k) worst = std::max(worst, 1.0 - pt.identity().row(k).squaredNorm() / n2);
  EXPECT_NEAR(pt.tail_energy[0], worst, 1e-9);
  const ProjectionTensor wide = project_kernel(des, OperatorSpec::heat(1), SineBasis(1, 200));
  EXPECT_LT(wide.tail_energy[0], 0.1 * pt.tail_energy[0]);
}

TEST(Projection, DerivativeChannelsIntegrateByParts) {
  const MeasurementDesign des = design_grid(1, bump(1), 0.04, 3, 0.1);
  const SineBasis basis(1, 100);
  const ProjectionTensor pt = project_kernel(des, OperatorSpec::transport_example(1, 0.0, v({1.0})), basis);
  ASSERT_EQ(pt.channels(), 4);
  for (int k = 0; k < des.M(); ++k) {
    const ScaledKernel sk = des.scaled(k);
    const double x = des.locations[k][0];
    for (int j : {1, 5, 33, 90}) {
      // ⟨∂*K, e_j⟩ = ⟨K, ∂e_j⟩
      const double oracle = gk(
          [&](double y) { return sk.value(&y) * std::sqrt(2.0) * j * M_PI * std::cos(j * M_PI * y); }, x - 0.04,
          x + 0.04);
      EXPECT_NEAR(pt.term(1)(k, j - 1), oracle, 1e-9 * std::max(1.0, std::abs(oracle)));
      // ⟨ΔK, e_j⟩ = -λ_j ⟨K, e_j⟩
      const double lam = std::pow(j * M_PI, 2);
      EXPECT_NEAR(pt.term(0)(k, j - 1), -lam * pt.identity()(k, j - 1), 1e-8 * std::max(1.0, lam));
    }
  }
}

TEST(Projection, CoefficientsDecayBeyondInverseScale) {
  const double delta = 0.02;
  const MeasurementDesign des = design_grid(1, bump(1), delta, 1, 0.3);
  const SineBasis basis(1, 400);
  const ProjectionTensor pt = project_kernel(des, OperatorSpec::heat(1), basis);
  std::vector<double> band(4, 0.0);
  for (int j = 0; j < 400; ++j) band[j / 100] += pt.identity()(0, j) * pt.identity()(0, j);
  for (int b = 1; b < 4; ++b) EXPECT_LT(band[b], 0.1 * band[b - 1]);
  EXPECT_LT(band[3] / band[0], 1e-5);
}

TEST(Projection, ProjectFunctionMatchesTensorRow) {
  const MeasurementDesign des = design_grid(1, bump(1), 0.05, 2, 0.1);
  const SineBasis basis(1, 60);
  const OperatorSpec spec = OperatorSpec::heat(1);
  const ProjectionTensor pt = project_kernel(des, spec, basis);
  std::vector<double> id(multi_indices(1).size(), 0.0);
  id[0] = 1.0;
  const Vec g = project_function(des, 1, id, basis, 8);
  EXPECT_LT((g.transpose() - pt.identity().row(1)).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(Projection, TensorMapMatchesDense) {
  const MeasurementDesign des = design_grid(2, bump(2), 0.08, 6, 0.1);
  const OperatorSpec spec = OperatorSpec::pure_reaction(2);
  ASSERT_TRUE(TensorChannelMap::eligible(des, spec));
  const SineBasis basis(2, 40);
  const TensorChannelMap tm(des, spec, basis);
  const ProjectionTensor pt = project_kernel(des, spec, basis);
  for (int c = 0; c < pt.channels(); ++c)
    for (int k = 0; k < des.M(); ++k) {
      const Vec r = tm.row(c, k);
      const double scale = std::max(1.0, pt.g[c].row(k).cwiseAbs().maxCoeff());
      EXPECT_LT((r.transpose() - pt.g[c].row(k)).cwiseAbs().maxCoeff(), 1e-9 * scale) << "c=" << c << " k=" << k;
    }
  // apply agrees with the explicit rows on random coefficients
  const DenseChannelMap dm(pt, spec);
  Mat x = Mat::Random(basis.size(), 3);
  std::vector<Mat> a, b;
  tm.apply(x, a);
  dm.apply(x, b);
  for (int c = 0; c < pt.channels(); ++c) EXPECT_LT((a[c] - b[c]).cwiseAbs().maxCoeff(), 1e-8 * (1.0 + b[c].norm()));
}

TEST(Measurements, ExtractIsLinear) {
  const MeasurementDesign des = design_grid(1, bump(1), 0.05, 3, 0.1);
  const SineBasis basis(1, 40);
  const OperatorSpec spec = OperatorSpec::transport_example(1, 0.2, v({1.0}));
  const ProjectionTensor pt = project_kernel(des, spec, basis);
  CoefficientTrajectory a, b, s;
  a.times = b.times = s.times = Vec::LinSpaced(5, 0.0, 0.4);
  a.x = RowMat::Random(5, 40);
  b.x = RowMat::Random(5, 40);
  s.x = 2.0 * a.x - 0.5 * b.x;
  const double kn = des.kernel->norm();
  const MeasurementPath ma = extract_measurements(a, pt, kn), mb = extract_measurements(b, pt, kn),
                        ms = extract_measurements(s, pt, kn);
  EXPECT_LT((ms.X - (2.0 * ma.X - 0.5 * mb.X)).cwiseAbs().maxCoeff(), 1e-12);
  for (int i = 0; i < 2; ++i) EXPECT_LT((ms.XA[i] - (2.0 * ma.XA[i] - 0.5 * mb.XA[i])).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((ms.XA0 - (2.0 * ma.XA0 - 0.5 * mb.XA0)).cwiseAbs().maxCoeff(), 1e-10);
  // X_A0 = c X for A_0 = c
  EXPECT_LT((ma.XA0 - 0.2 * ma.X).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Measurements, CsvRoundTrip) {
  MeasurementPath mp;
  mp.times = Vec::LinSpaced(4, 0.0, 0.3);
  mp.X = RowMat::Random(2, 4);
  mp.XA = {RowMat::Random(2, 4), RowMat::Random(2, 4)};
  mp.XA0 = RowMat::Random(2, 4);
  const std::string file = ::testing::TempDir() + "spdeloc_meas.csv";
  write_measurement_csv(mp, file);
  const MeasurementPath back = read_measurement_csv(file, 2, 0.7);
  EXPECT_LT((back.times - mp.times).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((back.X - mp.X).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((back.XA[1] - mp.XA[1]).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((back.XA0 - mp.XA0).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(back.noise_scale, 0.7);
  std::remove(file.c_str());
}

// Stationary covariance at lag 0 for A = Δ is ⟨K_k, (-Δ)^{-1} K_l⟩ / 2 with the Green's function
// G(x, y) = min(x, y)(1 - max(x, y)).
TEST(AnalyticCovariance, GreenFunctionOracle) {
  const double delta = 0.1;
  const MeasurementDesign des = design_grid(1, bump(1), delta, 2, 0.2);
  const GalerkinSystem sys = galerkin_drift(OperatorSpec::heat(1), v({1.0}), 400);
  const ProjectionTensor pt = project_kernel(des, OperatorSpec::heat(1), sys.basis);
  const CovarianceModel cm = covariance_model(sys, pt, des.kernel->norm());
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l) {
      const ScaledKernel a = des.scaled(k), b = des.scaled(l);
      const double xk = des.locations[k][0], xl = des.locations[l][0];
      const double oracle = 0.5 * gk(
                                      [&](double x) {
                                        // split at the kink y = x
                                        const double lo = xl - delta, hi = xl + delta;
                                        const double mid = std::clamp(x, lo, hi);
                                        const double left = gk([&](double y) { return y * (1.0 - x) * b.value(&y); },
                                                               lo, mid);
                                        const double right = gk([&](double y) { return x * (1.0 - y) * b.value(&y); },
                                                                mid, hi);
                                        return a.value(&x) * (left + right);
                                      },
                                      xk - delta, xk + delta);
      EXPECT_NEAR(analytic_covariance(cm, 0.0, k, l), oracle, 1e-8 * std::abs(oracle) + cm.tail_bound + 1e-14);
    }
}

TEST(AnalyticCovariance, SymmetricAndDecaying) {
  const MeasurementDesign des = design_grid(1, bump(1), 0.05, 3, 0.1);
  const GalerkinSystem sys = galerkin_drift(OperatorSpec::heat(1), v({1.0}), 80);
  const ProjectionTensor pt = project_kernel(des, OperatorSpec::heat(1), sys.basis);
  const CovarianceModel cm = covariance_model(sys, pt, des.kernel->norm());
  for (double t : {0.0, 1e-3, 0.05})
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l) EXPECT_DOUBLE_EQ(analytic_covariance(cm, t, k, l), analytic_covariance(cm, t, l, k));
  double prev = analytic_covariance(cm, 0.0, 1, 1);
  for (double t = 1e-4; t < 0.5; t *= 2.0) {
    const double c = analytic_covariance(cm, t, 1, 1);
    EXPECT_LT(c, prev);
    EXPECT_GT(c, 0.0);
    prev = c;
  }
  EXPECT_DOUBLE_EQ(analytic_covariance(cm, -0.01, 0, 1), analytic_covariance(cm, 0.01, 0, 1));
}

TEST(AnalyticCovariance, NonSelfAdjointRejected) {
  const GalerkinSystem sys = galerkin_drift(OperatorSpec::transport_example(1, 0.0, v({1.0})), v({1.0, 0.5}), 20);
  const MeasurementDesign des = design_grid(1, bump(1), 0.05, 1, 0.1);
  const ProjectionTensor pt =
      project_kernel(des, OperatorSpec::transport_example(1, 0.0, v({1.0})), sys.basis);
  try {
    covariance_model(sys, pt, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotSelfAdjoint);
  }
}

TEST(AnalyticCovariance, MonteCarloVarianceAndLag) {
  const double delta = 0.05;
  const MeasurementDesign des = design_grid(1, bump(1), delta, 2, 0.2);
  const GalerkinSystem sys = galerkin_drift(OperatorSpec::heat(1), v({1.0}), 80);
  const ProjectionTensor pt = project_kernel(des, OperatorSpec::heat(1), sys.basis);
  const CovarianceModel cm = covariance_model(sys, pt, des.kernel->norm());
  const double dt = delta * delta;
  const DiagonalStepper st = build_diagonal_stepper(sys.diag(), dt);
  const int R = 4000;
  double v0 = 0.0, v1 = 0.0;
  for (int r = 0; r < R; ++r) {
    const NormalStream rng(99, r);
    const CoefficientTrajectory tr = simulate_path(st, sample_initial(sys, InitialMode::Stationary, rng), 1, rng);
    const MeasurementPath mp = extract_measurements(tr, pt, des.kernel->norm());
    v0 += mp.X(0, 0) * mp.X(0, 0);
    v1 += mp.X(0, 0) * mp.X(0, 1);
  }
  v0 /= R;
  v1 /= R;
  const double c0 = analytic_covariance(cm, 0.0, 0, 0), c1 = analytic_covariance(cm, dt, 0, 0);
  EXPECT_NEAR(v0, c0, 4.0 * c0 * std::sqrt(2.0 / R));
  EXPECT_NEAR(v1, c1, 4.0 * c0 * std::sqrt(2.0 / R));
}
