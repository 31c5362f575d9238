#include <gtest/gtest.h>

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <vector>

#include "spdeloc/random.hpp"
#include "spdeloc/stats.hpp"

using namespace spdeloc;

// Known-answer vectors of Philox4x32-10.
TEST(Philox, KnownAnswers) {
  using A4 = std::array<uint32_t, 4>;
  EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}), (A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}),
            (A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}),
            (A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(NormalStream, Deterministic) {
  std::vector<double> a(101), b(101), c(101);
  NormalStream(7, 3).fill(5, a.data(), a.size());
  NormalStream(7, 3).fill(5, b.data(), b.size());
  NormalStream(7, 4).fill(5, c.data(), c.size());
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(NormalStream, MomentsAndShape) {
  const size_t n = 200000;
  std::vector<double> x(n);
  NormalStream(11, 0).fill(0, x.data(), n);
  double m = 0, m2 = 0, m4 = 0;
  for (double v : x) {
    m += v;
    m2 += v * v;
    m4 += v * v * v * v;
  }
  m /= n;
  m2 /= n;
  m4 /= n;
  EXPECT_NEAR(m, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(m2, 1.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(m4, 3.0, 4.0 * std::sqrt(96.0 / n));
  std::vector<double> sub(x.begin(), x.begin() + 20000);
  const boost::math::normal nd;
  const KsResult ks = ks_test(sub, [&](double v) { return boost::math::cdf(nd, v); });
  EXPECT_GT(ks.p_value, 0.001);
}

TEST(NormalStream, BlocksAndStreamsUncorrelated) {
  const size_t n = 50000;
  std::vector<double> a(n), b(n), c(n);
  NormalStream(1, 0).fill(0, a.data(), n);
  NormalStream(1, 0).fill(1, b.data(), n);
  NormalStream(1, 1).fill(0, c.data(), n);
  double ab = 0, ac = 0;
  for (size_t i = 0; i < n; ++i) {
    ab += a[i] * b[i];
    ac += a[i] * c[i];
  }
  EXPECT_LT(std::abs(ab / n), 4.0 / std::sqrt(n));
  EXPECT_LT(std::abs(ac / n), 4.0 / std::sqrt(n));
}

TEST(NormalStream, PrefixConsistentAcrossLengths) {
  std::vector<double> a(64), b(10);
  NormalStream(3, 9).fill(2, a.data(), a.size());
  NormalStream(3, 9).fill(2, b.data(), b.size());
  for (size_t i = 0; i < b.size(); ++i) EXPECT_EQ(a[i], b[i]);
}

TEST(NormalStream, UniformsInOpenInterval) {
  std::vector<double> u(100000);
  NormalStream(5, 1).fill_uniform(0, u.data(), u.size());
  double m = 0;
  for (double v : u) {
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
    m += v;
  }
  EXPECT_NEAR(m / u.size(), 0.5, 4.0 * std::sqrt(1.0 / 12.0 / u.size()));
}
