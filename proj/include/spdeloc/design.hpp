#pragma once

#include <array>
#include <memory>
#include <vector>

#include "spdeloc/kernel.hpp"

namespace spdeloc {

struct MeasurementDesign {
  int d = 1;
  double delta = 0.0;
  double margin = 0.0;
  std::shared_ptr<const Kernel> kernel;
  std::vector<std::array<double, 3>> locations;

  int M() const { return static_cast<int>(locations.size()); }
  ScaledKernel scaled(int k) const { return ScaledKernel(*kernel, delta, locations[k]); }
};

// Largest M for which design_grid succeeds.
int design_capacity(int d, double delta, double margin, double support_radius = 1.0);

// Equispaced δ-separated locations in J = [margin, 1 - margin]^d with pairwise distances
// > 2δ·(support radius) and supports inside (0,1)^d. d = 2 fills an m_x × m_y grid row by row.
MeasurementDesign design_grid(int d, std::shared_ptr<const Kernel> kernel, double delta, int M, double margin);

// Σ_{l≠k} |x_k - x_l|^{-p}.
double packing_sum(const MeasurementDesign& design, int k, double p);

// Gram matrix ⟨K_{δ,x_k}, K_{δ,x_l}⟩ by quadrature.
Mat design_gram(const MeasurementDesign& design);

}  // namespace spdeloc
