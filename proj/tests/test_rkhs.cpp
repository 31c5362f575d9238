#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <random>

#include "spdeloc/error.hpp"
#include "spdeloc/rkhs.hpp"

using namespace spdeloc;

namespace {

Vec v(std::initializer_list<double> x) {
  Vec r(x.size());
  int i = 0;
  for (double e : x) r(i++) = e;
  return r;
}

// Random smooth function Σ a_k sin(ω_k t + φ_k) with its derivative.
struct Smooth {
  std::vector<double> a, w, ph;
  double operator()(double t) const {
    double s = 0.0;
    for (size_t k = 0; k < a.size(); ++k) s += a[k] * std::sin(w[k] * t + ph[k]);
    return s;
  }
  double d(double t) const {
    double s = 0.0;
    for (size_t k = 0; k < a.size(); ++k) s += a[k] * w[k] * std::cos(w[k] * t + ph[k]);
    return s;
  }
};

Smooth random_smooth(std::mt19937& gen, int terms = 4) {
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
  Smooth s;
  for (int k = 0; k < terms; ++k) {
    s.a.push_back(z(gen));
    s.w.push_back(0.5 + 3.0 * std::abs(z(gen)));
    s.ph.push_back(u(gen));
  }
  return s;
}

SampledFunction sample(const Smooth& s, double T, int n) {
  return SampledFunction::from_function([&](double t) { return s(t); }, [&](double t) { return s.d(t); }, T, n);
}

Mat random_spd(int n, std::mt19937& gen) {
  std::normal_distribution<double> z;
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = z(gen);
  return a * a.transpose() + 0.1 * n * Mat::Identity(n, n);
}

}  // namespace

TEST(OuRkhs, ClosedFormExamples) {
  const double lam = 1.7, T = 2.0;
  const auto one = SampledFunction::from_function([](double) { return 1.0; }, [](double) { return 0.0; }, T, 101);
  EXPECT_NEAR(ou_rkhs_norm(one, lam), lam * lam * T + 2.0 * lam, 1e-12);
  const auto lin = SampledFunction::from_function([](double t) { return t; }, [](double) { return 1.0; }, T, 2001);
  EXPECT_NEAR(ou_rkhs_norm(lin, lam), lam * lam * T * T * T / 3.0 + lam * T * T + T, 1e-5);
}

TEST(OuRkhs, QuadraticFormAndPolarization) {
  std::mt19937 gen(1);
  const SampledFunction f = sample(random_smooth(gen), 1.5, 501), g = sample(random_smooth(gen), 1.5, 501);
  SampledFunction c = f;
  c.h *= -2.5;
  c.dh *= -2.5;
  EXPECT_NEAR(ou_rkhs_norm(c, 3.0), 6.25 * ou_rkhs_norm(f, 3.0), 1e-10 * ou_rkhs_norm(c, 3.0));
  EXPECT_NEAR(ou_rkhs_inner(f, f, 3.0), ou_rkhs_norm(f, 3.0), 1e-10 * ou_rkhs_norm(f, 3.0));
  EXPECT_NEAR(ou_rkhs_inner(f, g, 3.0), ou_rkhs_inner(g, f, 3.0), 1e-12);
  EXPECT_GE(ou_rkhs_norm(f, 3.0), 0.0);
}

// k_s(t) = e^{-λ|t-s|}/(2λ) reproduces point evaluation.
TEST(OuRkhs, ReproducingProperty) {
  std::mt19937 gen(8);
  const int n = 10001;
  const double T = 1.0;
  for (int trial = 0; trial < 10; ++trial) {
    const double lam = 0.5 + 4.0 * std::uniform_real_distribution<double>(0, 1)(gen);
    const Smooth h = random_smooth(gen);
    const int is = std::uniform_int_distribution<int>(0, n - 1)(gen);
    const double s = is * T / (n - 1);
    SampledFunction ks = SampledFunction::from_function(
        [&](double t) { return std::exp(-lam * std::abs(t - s)) / (2.0 * lam); },
        [&](double t) { return -0.5 * (t > s ? 1.0 : -1.0) * std::exp(-lam * std::abs(t - s)); }, T, n);
    ks.dh(is) = (is == 0 ? 0.5 : is == n - 1 ? -0.5 : 0.0);  // one-sided limit at the ends, average inside
    EXPECT_NEAR(ou_rkhs_inner(ks, sample(h, T, n), lam), h(s), 1e-4) << "trial " << trial;
  }
}

TEST(OuRkhs, GridRefinementOrder) {
  const double lam = 2.0, T = 1.3;
  const double exact = lam * lam * (T / 2 - std::sin(2 * T) / 4) + lam * std::sin(T) * std::sin(T) +
                       (T / 2 + std::sin(2 * T) / 4);
  std::vector<double> ea, ev;
  for (int n : {101, 201, 401}) {
    const auto a = SampledFunction::from_function([](double t) { return std::sin(t); },
                                                  [](double t) { return std::cos(t); }, T, n);
    Vec vals(n);
    for (int i = 0; i < n; ++i) vals(i) = std::sin(i * T / (n - 1));
    ea.push_back(std::abs(ou_rkhs_norm(a, lam) - exact));
    ev.push_back(std::abs(ou_rkhs_norm(SampledFunction::from_values(vals, T), lam) - exact));
  }
  for (int i = 0; i < 2; ++i) {
    EXPECT_GE(std::log2(ea[i] / ea[i + 1]), 1.9);
    EXPECT_GE(std::log2(ev[i] / ev[i + 1]), 1.9);
  }
}

TEST(OuRkhs, FiniteDifferenceErrorEstimate) {
  Vec vals(201);
  for (int i = 0; i < 201; ++i) vals(i) = std::exp(0.01 * i);
  const SampledFunction s = SampledFunction::from_values(vals, 2.0);
  double worst = 0.0;
  for (int i = 0; i < 201; ++i) worst = std::max(worst, std::abs(s.dh(i) - std::exp(0.01 * i)));
  EXPECT_GT(s.derivative_error, 0.0);
  EXPECT_LT(worst, 3.0 * s.derivative_error);
}

TEST(SpdeRkhs, SeriesMatchesClosedForm) {
  std::mt19937 gen(4);
  std::vector<SampledFunction> modes;
  Vec lam(5);
  for (int j = 0; j < 5; ++j) {
    lam(j) = std::pow(M_PI * (j + 1), 2);
    modes.push_back(sample(random_smooth(gen), 1.2, 801));
  }
  const SpdeNorm n = spde_rkhs_norm(modes, lam);
  EXPECT_NEAR(n.series, n.closed_form, 1e-9 * n.series);
}

TEST(SpdeRkhs, BoundHoldsOnRandomInputs) {
  std::mt19937 gen(5);
  std::uniform_int_distribution<int> nj(1, 8);
  std::uniform_real_distribution<double> ut(1.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int J = nj(gen);
    const double T = ut(gen);
    Vec lam(J);
    std::vector<SampledFunction> modes;
    for (int j = 0; j < J; ++j) {
      lam(j) = std::pow(M_PI * (j + 1), 2) * std::uniform_real_distribution<double>(0.2, 2.0)(gen);
      modes.push_back(sample(random_smooth(gen), T, 301));
    }
    const BoundCheck b = rkhs_bound_check(modes, lam);
    EXPECT_TRUE(b.holds) << b.norm << " > " << b.bound;
  }
  std::vector<SampledFunction> shortT{sample(random_smooth(gen), 0.5, 11)};
  EXPECT_THROW(rkhs_bound_check(shortT, v({1.0})), Error);
}

namespace {

struct MeasurementProblem {
  GalerkinSystem sys;
  MeasurementDesign des;
  RowMat g;
  Mat gram, gram_a;
};

MeasurementProblem measurement_problem(int M, double delta) {
  MeasurementProblem p;
  const Kernel raw = Kernel::bump(1);
  p.sys = galerkin_drift(OperatorSpec::heat(1), v({1.0}), 200);
  p.des = design_grid(1, std::make_shared<const Kernel>(raw.scaled(1.0 / raw.norm())), delta, M, 0.1);
  p.g = project_kernel(p.des, OperatorSpec::heat(1), p.sys.basis).identity();
  p.gram = design_gram(p.des);
  // ⟨ΔK_k, ΔK_l⟩ = δ^{-4}‖ΔK‖² on the diagonal for disjoint supports
  const double lap = p.des.kernel->laplacian_norm();
  p.gram_a = std::pow(delta, -4) * lap * lap * Mat::Identity(M, M);
  return p;
}

}  // namespace

TEST(MeasurementRkhs, BoundDominatesTruncatedNorm) {
  std::mt19937 gen(6);
  const double delta = 0.08;
  const MeasurementProblem p = measurement_problem(2, delta);
  const int n = 30;
  const double T = 1.0;
  const Mat C = measurement_covariance(p.sys, p.g, T / (n - 1), n);
  const Eigen::LDLT<Mat> ldlt(C);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<SampledFunction> h;
    Vec y(n * 2);
    for (int k = 0; k < 2; ++k) {
      h.push_back(sample(random_smooth(gen), T, n));
      for (int m = 0; m < n; ++m) y(m * 2 + k) = h[k].h(m);
    }
    const double exact = y.dot(ldlt.solve(y));
    EXPECT_LE(exact, measurement_rkhs_bound(p.gram, p.gram_a, h));
    const double lap = p.des.kernel->laplacian_norm();
    if (delta * delta <= lap) EXPECT_LE(exact, laplace_measurement_bound(delta, lap, h));
  }
}

TEST(MeasurementRkhs, SingularGramRejected) {
  std::vector<SampledFunction> h{SampledFunction::from_values(Vec::Ones(5), 1.0),
                                 SampledFunction::from_values(Vec::Ones(5), 1.0)};
  try {
    measurement_rkhs_bound(Mat::Ones(2, 2), Mat::Identity(2, 2), h);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularGram);
  }
}

TEST(Hellinger, SymmetryRangeIdentity) {
  std::mt19937 gen(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 5;
    const Mat a = random_spd(n, gen), b = random_spd(n, gen);
    const double h = hellinger_gaussian(a, b);
    EXPECT_NEAR(h, hellinger_gaussian(b, a), 1e-12);
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, 2.0);
    EXPECT_LT(hellinger_gaussian(a, a), 1e-14);
    // invariance under a joint congruence
    const Mat l = random_spd(n, gen);
    EXPECT_NEAR(hellinger_gaussian(l * a * l.transpose(), l * b * l.transpose()), h, 1e-9);
  }
}

TEST(Hellinger, OneDimensionalProductBound) {
  for (double tau = 0.05; tau <= 5.0; tau += 0.01) {
    const double h = hellinger_gaussian(Mat::Identity(1, 1), Mat::Constant(1, 1, tau));
    EXPECT_NEAR(h, 2.0 - 2.0 * std::pow(tau, 0.25) / std::sqrt(0.5 * (1.0 + tau)), 1e-12);
    EXPECT_LE(h, 2.0 * (tau - 1.0) * (tau - 1.0) + 1e-15) << tau;
  }
}

// ∫(√p0 - √p1)² over R³ with tensor Gauss-Legendre panels.
TEST(Hellinger, ThreeDimensionalQuadrature) {
  Mat c0(3, 3), c1(3, 3);
  c0 << 1.0, 0.3, 0.1, 0.3, 0.8, -0.2, 0.1, -0.2, 1.2;
  c1 << 1.4, 0.1, 0.0, 0.1, 0.6, 0.1, 0.0, 0.1, 0.9;
  const Mat p0 = c0.inverse(), p1 = c1.inverse();
  const double n0 = 1.0 / std::sqrt(std::pow(2 * M_PI, 3) * c0.determinant());
  const double n1 = 1.0 / std::sqrt(std::pow(2 * M_PI, 3) * c1.determinant());
  using GL = boost::math::quadrature::gauss<double, 20>;
  const double L = 7.0;
  const int panels = 8;
  std::vector<double> x, w;
  for (int p = 0; p < panels; ++p) {
    const double a = -L + 2 * L * p / panels, b = a + 2 * L / panels;
    for (size_t i = 0; i < GL::abscissa().size(); ++i)
      for (int s : {-1, 1}) {
        if (i == 0 && s == -1 && GL::abscissa()[0] == 0.0) continue;
        x.push_back(0.5 * (a + b) + s * 0.5 * (b - a) * GL::abscissa()[i]);
        w.push_back(0.5 * (b - a) * GL::weights()[i]);
      }
  }
  double integral = 0.0;
  Eigen::Vector3d y;
  for (size_t i = 0; i < x.size(); ++i)
    for (size_t j = 0; j < x.size(); ++j)
      for (size_t k = 0; k < x.size(); ++k) {
        y << x[i], x[j], x[k];
        const double f0 = n0 * std::exp(-0.5 * y.dot(p0 * y)), f1 = n1 * std::exp(-0.5 * y.dot(p1 * y));
        const double d = std::sqrt(f0) - std::sqrt(f1);
        integral += w[i] * w[j] * w[k] * d * d;
      }
  EXPECT_NEAR(hellinger_gaussian(c0, c1), integral, 1e-8);
}

TEST(LowerBound, CertificationSoundOnRandomPairs) {
  std::mt19937 gen(9);
  std::normal_distribution<double> z;
  int certified = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 6;
    const Mat c0 = random_spd(n, gen);
    Mat e(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) e(i, j) = z(gen);
    e = (0.5 * (e + e.transpose())).eval();
    const double scale = std::pow(10.0, std::uniform_real_distribution<double>(-2.0, 0.5)(gen));
    const Mat c1 = c0 + scale * e;
    if (Eigen::SelfAdjointEigenSolver<Mat>(c1).eigenvalues().minCoeff() <= 1e-6) continue;
    const LowerBound lb = lower_bound_condition(GaussianPairTruncation::make(c0, c1));
    if (lb.certified) {
      ++certified;
      EXPECT_LE(lb.hellinger, 1.0);
    }
    EXPECT_TRUE(lb.consistent);
    EXPECT_GE(lb.s_value, 0.0);
  }
  EXPECT_GT(certified, 100);
}

TEST(LowerBound, ZeroPerturbation) {
  std::mt19937 gen(10);
  const Mat c = random_spd(4, gen);
  const LowerBound lb = lower_bound_condition(GaussianPairTruncation::make(c, c));
  EXPECT_LT(lb.s_value, 1e-20);
  EXPECT_TRUE(lb.certified);
  EXPECT_LT(lb.hellinger, 1e-14);
}

TEST(LowerBound, DegenerateRejected) {
  Mat c = Mat::Zero(2, 2);
  c(0, 0) = 1.0;
  try {
    GaussianPairTruncation::make(c, Mat::Identity(2, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Degenerate);
  }
}

TEST(MeasurementCovariance, StationaryBlocks) {
  const MeasurementProblem p = measurement_problem(3, 0.05);
  const double dt = 0.01;
  const Mat C = measurement_covariance(p.sys, p.g, dt, 4);
  EXPECT_LT((C - C.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  // time-stationarity: block (m, m') depends on m - m' only
  EXPECT_LT((C.block(3, 0, 3, 3) - C.block(9, 6, 3, 3)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Mat>(C).eigenvalues().minCoeff(), 0.0);
  // the dense path agrees with the diagonal path
  GalerkinSystem dense = p.sys;
  dense.diagonal = false;
  const Mat Cd = measurement_covariance(dense, p.g.leftCols(200), dt, 4);
  EXPECT_LT((Cd - C).cwiseAbs().maxCoeff(), 1e-9 * C.cwiseAbs().maxCoeff());
}

TEST(TruncationTrace, ShrinksWithModes) {
  const Kernel raw = Kernel::bump(1);
  const auto k = std::make_shared<const Kernel>(raw);
  const MeasurementDesign des = design_grid(1, k, 0.05, 2, 0.1);
  double prev = 1e300;
  for (int N : {20, 40, 80}) {
    const GalerkinSystem sys = galerkin_drift(OperatorSpec::heat(1), v({1.0}), N);
    const double b = truncation_trace_bound(sys, project_kernel(des, OperatorSpec::heat(1), sys.basis), raw.norm());
    EXPECT_LT(b, prev);
    prev = b;
  }
}
