#include <gtest/gtest.h>

#include <cmath>

#include "spdeloc/design.hpp"
#include "spdeloc/error.hpp"

using namespace spdeloc;

namespace {

std::shared_ptr<const Kernel> bump(int d) { return std::make_shared<const Kernel>(Kernel::bump(d)); }

double dist(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return std::sqrt(std::pow(a[0] - b[0], 2) + std::pow(a[1] - b[1], 2) + std::pow(a[2] - b[2], 2));
}

}  // namespace

TEST(Design, ThreePointsOneDimension) {
  const MeasurementDesign d = design_grid(1, bump(1), 0.1, 3, 0.2);
  ASSERT_EQ(d.M(), 3);
  for (const auto& x : d.locations) {
    EXPECT_GE(x[0], 0.2 - 1e-12);
    EXPECT_LE(x[0], 0.8 + 1e-12);
  }
  for (int k = 1; k < 3; ++k) EXPECT_GT(d.locations[k][0] - d.locations[k - 1][0], 0.2);
}

TEST(Design, SeparationAndSupportInside) {
  for (int dim : {1, 2})
    for (double delta : {0.1, 0.03, 0.01}) {
      const int cap = design_capacity(dim, delta, 0.1);
      const int M = std::max(1, cap / 2);
      const MeasurementDesign d = design_grid(dim, bump(dim), delta, M, 0.1);
      for (int k = 0; k < d.M(); ++k) {
        for (int a = 0; a < dim; ++a) {
          EXPECT_GT(d.locations[k][a] - delta, 0.0);
          EXPECT_LT(d.locations[k][a] + delta, 1.0);
        }
        for (int l = 0; l < k; ++l) EXPECT_GT(dist(d.locations[k], d.locations[l]), 2.0 * delta);
      }
    }
}

TEST(Design, CapacityIsSharp) {
  for (int dim : {1, 2})
    for (double delta : {0.1, 0.02}) {
      const int cap = design_capacity(dim, delta, 0.1);
      EXPECT_NO_THROW(design_grid(dim, bump(dim), delta, cap, 0.1));
      try {
        design_grid(dim, bump(dim), delta, cap + 1, 0.1);
        FAIL() << "capacity " << cap << " should be the maximum";
      } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Infeasible);
      }
    }
}

// Σ_{l≠k}|x_k - x_l|^{-p} ≤ C δ^{-p} for p = d + 1 with C the lattice sum at spacing 2δ.
TEST(Design, PackingSumBound) {
  const double c1 = 2.0 * (M_PI * M_PI / 6.0) / 4.0;  // 2ζ(2)/2²
  const double c2 = 9.0336 / 8.0;                      // Σ_{z∈Z²\0}|z|^{-3} / 2³
  double worst1 = 0.0, worst2 = 0.0;
  for (double delta : {0.05, 0.02, 0.01, 0.005}) {
    const MeasurementDesign d1 = design_grid(1, bump(1), delta, design_capacity(1, delta, 0.1), 0.1);
    const MeasurementDesign d2 = design_grid(2, bump(2), delta, design_capacity(2, delta, 0.1), 0.1);
    for (int k = 0; k < d1.M(); ++k) worst1 = std::max(worst1, packing_sum(d1, k, 2.0) * delta * delta);
    for (int k = 0; k < d2.M(); k += 7) worst2 = std::max(worst2, packing_sum(d2, k, 3.0) * std::pow(delta, 3));
  }
  EXPECT_LE(worst1, c1 + 1e-12);
  EXPECT_LE(worst2, c2 + 1e-6);
  EXPECT_GT(worst1, 0.0);
}

TEST(Design, GramIsScaledIdentity) {
  for (int dim : {1, 2}) {
    const MeasurementDesign d = design_grid(dim, bump(dim), 0.05, 6, 0.1);
    const Mat g = design_gram(d);
    const double n2 = d.kernel->norm() * d.kernel->norm();
    EXPECT_LT((g - n2 * Mat::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, n2));
  }
}

TEST(Design, Deterministic) {
  const MeasurementDesign a = design_grid(2, bump(2), 0.04, 20, 0.1);
  const MeasurementDesign b = design_grid(2, bump(2), 0.04, 20, 0.1);
  EXPECT_EQ(a.locations, b.locations);
}
