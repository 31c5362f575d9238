#pragma once

#include <array>
#include <string>
#include <vector>

#include "spdeloc/linalg.hpp"

namespace spdeloc {

// Multi-index α with |α| ≤ 2 in dimension d ≤ 3.
struct MultiIndex {
  std::array<int, 3> a{0, 0, 0};
  int order() const { return a[0] + a[1] + a[2]; }
  bool operator==(const MultiIndex&) const = default;
};

// All multi-indices with |α| ≤ max_order in graded lexicographic order:
// by degree, then lexicographically descending (x before y before z).
std::vector<MultiIndex> multi_indices(int d, int max_order = 2);

// Position of α in multi_indices(d, 2); -1 if not representable.
int multi_index_position(int d, const MultiIndex& alpha);

// "2", "1,1", ... (comma separated components, d entries).
std::string format_multi_index(int d, const MultiIndex& alpha);
MultiIndex parse_multi_index(int d, const std::string& key);

// Constant-coefficient operator Σ_α c_α D^α, coefficients aligned with multi_indices(d, 2).
struct DifferentialOperator {
  std::string name;
  int order = 0;
  std::vector<double> coeff;

  double at(int d, const MultiIndex& alpha) const;
  // Highest |α| with a nonzero coefficient; -1 for the zero operator.
  int computed_order(int d) const;
  bool is_zero() const;
};

// A_θ = Σ_i θ_i A_i + A_0 on (0,1)^d with Dirichlet conditions.
struct OperatorSpec {
  int dimension = 1;
  DifferentialOperator base;                // A_0
  std::vector<DifferentialOperator> terms;  // A_1..A_p

  int p() const { return static_cast<int>(terms.size()); }
  std::vector<int> orders() const;
  void validate() const;  // throws InvalidConfig

  // Coefficient vector of A_θ.
  std::vector<double> combined(const Vec& theta) const;

  // Example 1: θ1 Δ + θ2 b·∇ + c.
  static OperatorSpec transport_example(int d, double c, const Vec& b);
  // Example 2: θ1 Δ + θ2 b·∇ + θ3.
  static OperatorSpec reaction_example(int d, const Vec& b);
  // Δ + θ (reaction only, unit diffusivity known).
  static OperatorSpec pure_reaction(int d);
  // θ1 Δ.
  static OperatorSpec heat(int d);
};

// Split of a constant-coefficient second-order operator as ∇·a∇ + b·∇ + c.
struct Symbols {
  Mat a;
  Vec b;
  double c = 0.0;
};

Symbols symbols_of(int d, const std::vector<double>& coeff);
Symbols symbols(const OperatorSpec& spec, const Vec& theta);

// Minimum of the second-order symbol over unit vectors; throws NonElliptic if ≤ 0.
double ellipticity_check(const OperatorSpec& spec, const Vec& theta);

struct DiagonalizingTransform {
  Vec w;               // U_θ(x) = exp(-w·x)
  double c_tilde = 0;  // c_θ - b·a^{-1}b / 4
  Mat a;               // principal part of Ã_θ = ∇·a∇
};

DiagonalizingTransform diagonalize(const OperatorSpec& spec, const Vec& theta);

}  // namespace spdeloc
