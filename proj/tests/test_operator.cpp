#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "spdeloc/error.hpp"
#include "spdeloc/operator.hpp"

using namespace spdeloc;

namespace {

Vec v(std::initializer_list<double> x) {
  Vec r(x.size());
  int i = 0;
  for (double e : x) r(i++) = e;
  return r;
}

}  // namespace

TEST(MultiIndex, GradedLexOrder) {
  const auto idx = multi_indices(2, 2);
  ASSERT_EQ(idx.size(), 6u);
  const std::vector<std::array<int, 3>> expect = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {2, 0, 0}, {1, 1, 0}, {0, 2, 0}};
  for (size_t k = 0; k < idx.size(); ++k) EXPECT_EQ(idx[k].a, expect[k]);
  EXPECT_EQ(multi_indices(1, 2).size(), 3u);
  EXPECT_EQ(multi_indices(3, 2).size(), 10u);
}

TEST(MultiIndex, FormatParseRoundTrip) {
  for (int d = 1; d <= 3; ++d)
    for (const auto& a : multi_indices(d, 2)) {
      const std::string s = format_multi_index(d, a);
      EXPECT_EQ(parse_multi_index(d, s), a) << s;
      EXPECT_EQ(multi_index_position(d, a) >= 0, true);
    }
  EXPECT_EQ(format_multi_index(2, MultiIndex{{1, 1, 0}}), "1,1");
}

TEST(Ellipticity, HeatConstantIsTheta) {
  EXPECT_NEAR(ellipticity_check(OperatorSpec::heat(1), v({1.0})), 1.0, 1e-14);
  EXPECT_NEAR(ellipticity_check(OperatorSpec::heat(2), v({0.3})), 0.3, 1e-14);
}

TEST(Ellipticity, DegenerateThrows) {
  try {
    ellipticity_check(OperatorSpec::heat(1), v({0.0}));
    FAIL() << "expected NonElliptic";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonElliptic);
  }
  EXPECT_THROW(ellipticity_check(OperatorSpec::heat(2), v({-1.0})), Error);
}

TEST(Ellipticity, ReactionExampleTwoDimensionsMatchesCircleSearch) {
  Vec b(2);
  b << 0.6, 0.8;
  const OperatorSpec s = OperatorSpec::reaction_example(2, b);
  const Vec th = v({2.0, 0.5, -1.0});
  const double c = ellipticity_check(s, th);
  // brute-force minimum of Σ a_α x^α over the unit circle
  const Symbols sym = symbols(s, th);
  double best = 1e300;
  for (int i = 0; i < 20000; ++i) {
    const double t = 2 * M_PI * i / 20000.0;
    Vec x(2);
    x << std::cos(t), std::sin(t);
    best = std::min(best, x.dot(sym.a * x));
  }
  EXPECT_NEAR(c, best, 1e-8);
  EXPECT_NEAR(c, 2.0, 1e-12);
}

TEST(Symbols, TransportExampleParts) {
  const OperatorSpec s = OperatorSpec::transport_example(1, 0.2, v({1.0}));
  const Symbols sym = symbols(s, v({1.5, 0.7}));
  EXPECT_NEAR(sym.a(0, 0), 1.5, 1e-15);
  EXPECT_NEAR(sym.b(0), 0.7, 1e-15);
  EXPECT_NEAR(sym.c, 0.2, 1e-15);
  EXPECT_EQ(s.orders(), (std::vector<int>{2, 1}));
}

TEST(Diagonalize, NoTransportIsTrivial) {
  const DiagonalizingTransform t = diagonalize(OperatorSpec::transport_example(1, 0.2, v({1.0})), v({1.0, 0.0}));
  EXPECT_NEAR(t.w(0), 0.0, 1e-15);
  EXPECT_NEAR(t.c_tilde, 0.2, 1e-15);
}

TEST(Diagonalize, UnitTransportShift) {
  const DiagonalizingTransform t = diagonalize(OperatorSpec::reaction_example(1, v({1.0})), v({1.0, 1.0, 0.0}));
  EXPECT_NEAR(t.w(0), 0.5, 1e-14);
  EXPECT_NEAR(t.c_tilde, -0.25, 1e-14);
}

TEST(Diagonalize, SignFlipOfTransport) {
  const OperatorSpec s = OperatorSpec::reaction_example(2, v({0.6, 0.8}));
  const auto a = diagonalize(s, v({1.3, 0.4, -0.2}));
  const auto b = diagonalize(s, v({1.3, -0.4, -0.2}));
  EXPECT_NEAR((a.w + b.w).norm(), 0.0, 1e-14);
  EXPECT_NEAR(a.c_tilde, b.c_tilde, 1e-14);
}

// A f = U (Ã + c̃) U^{-1} f on a grid by central differences.
TEST(Diagonalize, ConjugationIdentityFiniteDifferences) {
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const OperatorSpec s = OperatorSpec::reaction_example(1, v({1.0}));
  for (int trial = 0; trial < 5; ++trial) {
    const Vec th = v({1.0 + 0.5 * (u(gen) + 1.0), u(gen), u(gen)});
    const auto t = diagonalize(s, th);
    const double w = t.w(0), a = t.a(0, 0);
    auto f = [](double x) { return std::sin(2.0 * x) + x * x; };
    auto g = [&](double x) { return std::exp(w * x) * f(x); };
    const double h = 1e-3;
    double worst = 0.0;
    for (double x = 0.1; x < 0.9; x += 0.05) {
      const double fpp = (f(x + h) - 2 * f(x) + f(x - h)) / (h * h);
      const double fp = (f(x + h) - f(x - h)) / (2 * h);
      const double lhs = th(0) * fpp + th(1) * fp + th(2) * f(x);
      const double gpp = (g(x + h) - 2 * g(x) + g(x - h)) / (h * h);
      const double rhs = std::exp(-w * x) * (a * gpp + t.c_tilde * g(x));
      worst = std::max(worst, std::abs(lhs - rhs));
    }
    EXPECT_LT(worst, 1e-5);
  }
}

TEST(OperatorSpec, ValidateRejectsOrderMismatch) {
  OperatorSpec s = OperatorSpec::heat(1);
  s.terms[0].order = 1;
  EXPECT_THROW(s.validate(), Error);
}

TEST(OperatorSpec, CombinedIsLinear) {
  const OperatorSpec s = OperatorSpec::reaction_example(2, v({0.6, 0.8}));
  const Vec a = v({1.0, 0.2, -0.3}), b = v({0.5, -0.1, 0.7});
  const auto ca = s.combined(a), cb = s.combined(b), cab = s.combined(a + b), c0 = s.combined(Vec::Zero(3));
  for (size_t k = 0; k < ca.size(); ++k) EXPECT_NEAR(cab[k] - c0[k], (ca[k] - c0[k]) + (cb[k] - c0[k]), 1e-14);
}
