#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "spdeloc/error.hpp"
#include "spdeloc/sigma.hpp"

using namespace spdeloc;

namespace {

double gk(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 10, 1e-13);
}

Vec v(std::initializer_list<double> x) {
  Vec r(x.size());
  int i = 0;
  for (double e : x) r(i++) = e;
  return r;
}

Kernel unit_bump(int d) {
  const Kernel k = Kernel::bump(d);
  return k.scaled(1.0 / k.norm());
}

}  // namespace

// ‖(-Δ)^{-1/2}∂K‖ = ‖K‖ in d = 1.
TEST(Sigma, TransportVarianceIdentity) {
  for (const Kernel& k : {Kernel::bump(1), Kernel::laplacian_bump(1), Kernel::bump(1, 2.0, 3.0)}) {
    const double n2 = fourier_norm_sq(k, -0.5, 0);
    EXPECT_NEAR(n2 / (k.norm() * k.norm()), 1.0, 1e-6) << k.name();
  }
}

TEST(Sigma, SobolevZeroAndGradient) {
  const Kernel k = Kernel::bump(2);
  EXPECT_NEAR(fourier_norm_sq(k, 0.0) / (k.norm() * k.norm()), 1.0, 1e-8);
  EXPECT_NEAR(fourier_norm_sq(k, 0.5) / (k.grad_norm() * k.grad_norm()), 1.0, 1e-6);
  EXPECT_NEAR(fourier_norm_sq(k, 1.0) / (k.laplacian_norm() * k.laplacian_norm()), 1.0, 1e-6);
}

TEST(Sigma, ExampleOneClosedForm) {
  const Kernel k = Kernel::bump(1);
  const double theta1 = 0.8, T = 2.0;
  const Mat s = asymptotic_sigma(k, OperatorSpec::transport_example(1, 0.2, v({1.0})), v({theta1, 0.3}), T);
  EXPECT_NEAR(s(0, 0) / (T / (2 * theta1) * k.grad_norm() * k.grad_norm()), 1.0, 1e-6);
  EXPECT_NEAR(s(1, 1) / (T / (2 * theta1) * k.norm() * k.norm()), 1.0, 1e-6);
  EXPECT_LT(std::abs(s(0, 1)), 1e-8 * s(0, 0));
}

TEST(Sigma, ExampleTwoCovarianceEntries) {
  const Kernel k = unit_bump(3);
  for (double theta1 : {1.0, 0.5}) {
    const double T = 1.0;
    const SigmaResult r = asymptotic_sigma_full(k, OperatorSpec::reaction_example(3, v({1.0, 0.0, 0.0})),
                                                v({theta1, 0.4, -0.2}), T);
    EXPECT_NEAR(r.sigma(0, 2), -T / (2.0 * theta1), 1e-6);
    EXPECT_LT(std::abs(r.sigma(0, 1)), 1e-6);
    EXPECT_LT(std::abs(r.sigma(1, 2)), 1e-6);
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Mat>(r.sigma).eigenvalues().minCoeff(), 0.0);
    EXPECT_NEAR(r.sigma(0, 1), r.sigma(1, 0), 1e-14);
  }
}

// ‖(-Δ)^{-1/2}K‖² = ∫∫ K(x)K(y) / (4π|x - y|) in d = 3, via the radial Newton potential.
TEST(Sigma, NewtonPotentialOracle) {
  const Kernel k = Kernel::bump(3);
  auto f = [&](double r) { return k.radial_value(r); };
  auto potential = [&](double r) {
    const double inner = r > 0.0 ? gk([&](double s) { return f(s) * s * s; }, 0.0, r) / r : 0.0;
    return inner + gk([&](double s) { return f(s) * s; }, r, 1.0);
  };
  const double oracle = 4.0 * M_PI * gk([&](double r) { return f(r) * potential(r) * r * r; }, 0.0, 1.0);
  EXPECT_NEAR(fourier_norm_sq(k, -0.5) / oracle, 1.0, 1e-5);
}

TEST(Sigma, ReactionDivergesInLowDimension) {
  for (int d : {1, 2}) {
    Vec b = Vec::Zero(d);
    b(0) = 1.0;
    try {
      asymptotic_sigma(Kernel::bump(d), OperatorSpec::reaction_example(d, b), v({1.0, 0.0, 0.0}), 1.0);
      FAIL() << "d=" << d;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Divergent);
    }
  }
  // a kernel with vanishing integral makes the reaction entry finite in d = 2
  const Mat s = asymptotic_sigma(Kernel::laplacian_bump(2), OperatorSpec::pure_reaction(2), v({0.0}), 1.0);
  EXPECT_TRUE(std::isfinite(s(0, 0)));
  EXPECT_GT(s(0, 0), 0.0);
}

TEST(Sigma, LinearInTime) {
  const Kernel k = Kernel::bump(1);
  const OperatorSpec spec = OperatorSpec::transport_example(1, 0.0, v({1.0}));
  const Mat a = asymptotic_sigma(k, spec, v({1.0, 0.0}), 1.0);
  const Mat b = asymptotic_sigma(k, spec, v({1.0, 0.0}), 3.0);
  EXPECT_LT((b - 3.0 * a).norm(), 1e-10 * b.norm());
}
