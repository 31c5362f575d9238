#include "spdeloc/operator.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "spdeloc/error.hpp"

namespace spdeloc {

std::vector<MultiIndex> multi_indices(int d, int max_order) {
  std::vector<MultiIndex> out;
  for (int deg = 0; deg <= max_order; ++deg) {
    // lexicographically descending: larger power on earlier axes first
    if (d == 1) {
      out.push_back({{deg, 0, 0}});
    } else if (d == 2) {
      for (int i = deg; i >= 0; --i) out.push_back({{i, deg - i, 0}});
    } else {
      for (int i = deg; i >= 0; --i)
        for (int j = deg - i; j >= 0; --j) out.push_back({{i, j, deg - i - j}});
    }
  }
  return out;
}

int multi_index_position(int d, const MultiIndex& alpha) {
  const auto all = multi_indices(d, 2);
  for (size_t i = 0; i < all.size(); ++i)
    if (all[i] == alpha) return static_cast<int>(i);
  return -1;
}

std::string format_multi_index(int d, const MultiIndex& alpha) {
  std::ostringstream os;
  for (int i = 0; i < d; ++i) {
    if (i) os << ',';
    os << alpha.a[i];
  }
  return os.str();
}

MultiIndex parse_multi_index(int d, const std::string& key) {
  MultiIndex m;
  std::stringstream ss(key);
  std::string part;
  int i = 0;
  while (std::getline(ss, part, ',')) {
    if (i >= d) fail(ErrorKind::InvalidConfig, "multi-index '" + key + "' has too many entries");
    m.a[i++] = std::stoi(part);
  }
  if (i != d) fail(ErrorKind::InvalidConfig, "multi-index '" + key + "' needs " + std::to_string(d) + " entries");
  if (m.order() > 2 || m.a[0] < 0 || m.a[1] < 0 || m.a[2] < 0)
    fail(ErrorKind::InvalidConfig, "multi-index '" + key + "' out of range");
  return m;
}

double DifferentialOperator::at(int d, const MultiIndex& alpha) const {
  const int pos = multi_index_position(d, alpha);
  if (pos < 0 || pos >= static_cast<int>(coeff.size())) return 0.0;
  return coeff[pos];
}

int DifferentialOperator::computed_order(int d) const {
  const auto idx = multi_indices(d, 2);
  int best = -1;
  for (size_t i = 0; i < idx.size() && i < coeff.size(); ++i)
    if (coeff[i] != 0.0) best = std::max(best, idx[i].order());
  return best;
}

bool DifferentialOperator::is_zero() const {
  for (double c : coeff)
    if (c != 0.0) return false;
  return true;
}

std::vector<int> OperatorSpec::orders() const {
  std::vector<int> out;
  for (const auto& t : terms) out.push_back(t.order);
  return out;
}

void OperatorSpec::validate() const {
  if (dimension < 1 || dimension > 3) fail(ErrorKind::InvalidConfig, "dimension must be 1, 2 or 3");
  const size_t n = multi_indices(dimension, 2).size();
  if (base.coeff.size() != n) fail(ErrorKind::InvalidConfig, "A_0 coefficient table has wrong size");
  if (terms.empty()) fail(ErrorKind::InvalidConfig, "at least one unknown coefficient is required");
  for (const auto& t : terms) {
    if (t.coeff.size() != n) fail(ErrorKind::InvalidConfig, t.name + ": coefficient table has wrong size");
    if (t.order < 0 || t.order > 2) fail(ErrorKind::InvalidConfig, t.name + ": order must be 0, 1 or 2");
    if (t.computed_order(dimension) != t.order)
      fail(ErrorKind::InvalidConfig, t.name + ": declared order " + std::to_string(t.order) +
                                         " does not match its highest nonzero coefficient");
  }
  if (!base.is_zero() && base.computed_order(dimension) > 2)
    fail(ErrorKind::InvalidConfig, "A_0 order exceeds 2");
}

std::vector<double> OperatorSpec::combined(const Vec& theta) const {
  if (theta.size() != p()) fail(ErrorKind::InvalidConfig, "θ has length " + std::to_string(theta.size()) +
                                                              ", expected " + std::to_string(p()));
  std::vector<double> out = base.coeff;
  for (int i = 0; i < p(); ++i)
    for (size_t k = 0; k < out.size(); ++k) out[k] += theta(i) * terms[i].coeff[k];
  return out;
}

namespace {

DifferentialOperator zero_op(int d, std::string name, int order) {
  return {std::move(name), order, std::vector<double>(multi_indices(d, 2).size(), 0.0)};
}

DifferentialOperator laplacian(int d) {
  auto op = zero_op(d, "laplacian", 2);
  for (int i = 0; i < d; ++i) {
    MultiIndex m;
    m.a[i] = 2;
    op.coeff[multi_index_position(d, m)] = 1.0;
  }
  return op;
}

DifferentialOperator transport(int d, const Vec& b) {
  auto op = zero_op(d, "transport", 1);
  for (int i = 0; i < d; ++i) {
    MultiIndex m;
    m.a[i] = 1;
    op.coeff[multi_index_position(d, m)] = b(i);
  }
  return op;
}

DifferentialOperator identity(int d, double c, std::string name) {
  auto op = zero_op(d, std::move(name), 0);
  op.coeff[0] = c;
  return op;
}

}  // namespace

OperatorSpec OperatorSpec::transport_example(int d, double c, const Vec& b) {
  OperatorSpec s;
  s.dimension = d;
  s.base = identity(d, c, "base");
  s.base.order = c != 0.0 ? 0 : -1;
  s.terms = {laplacian(d), transport(d, b)};
  return s;
}

OperatorSpec OperatorSpec::reaction_example(int d, const Vec& b) {
  OperatorSpec s;
  s.dimension = d;
  s.base = zero_op(d, "base", -1);
  s.terms = {laplacian(d), transport(d, b), identity(d, 1.0, "reaction")};
  return s;
}

OperatorSpec OperatorSpec::pure_reaction(int d) {
  OperatorSpec s;
  s.dimension = d;
  s.base = laplacian(d);
  s.base.name = "base";
  s.terms = {identity(d, 1.0, "reaction")};
  return s;
}

OperatorSpec OperatorSpec::heat(int d) {
  OperatorSpec s;
  s.dimension = d;
  s.base = zero_op(d, "base", -1);
  s.terms = {laplacian(d)};
  return s;
}

Symbols symbols_of(int d, const std::vector<double>& coeff) {
  Symbols s;
  s.a = Mat::Zero(d, d);
  s.b = Vec::Zero(d);
  const auto idx = multi_indices(d, 2);
  for (size_t k = 0; k < idx.size(); ++k) {
    const MultiIndex& m = idx[k];
    const double v = coeff[k];
    if (m.order() == 0) {
      s.c = v;
    } else if (m.order() == 1) {
      for (int i = 0; i < d; ++i)
        if (m.a[i] == 1) s.b(i) = v;
    } else {
      int first = -1, second = -1;
      for (int i = 0; i < d; ++i) {
        if (m.a[i] == 2) first = second = i;
        if (m.a[i] == 1) (first < 0 ? first : second) = i;
      }
      if (first == second) {
        s.a(first, first) = v;
      } else {
        s.a(first, second) = 0.5 * v;
        s.a(second, first) = 0.5 * v;
      }
    }
  }
  return s;
}

Symbols symbols(const OperatorSpec& spec, const Vec& theta) {
  return symbols_of(spec.dimension, spec.combined(theta));
}

double ellipticity_check(const OperatorSpec& spec, const Vec& theta) {
  const Symbols s = symbols(spec, theta);
  Eigen::SelfAdjointEigenSolver<Mat> es(s.a, Eigen::EigenvaluesOnly);
  const double c = es.eigenvalues().minCoeff();
  if (!(c > 0.0)) {
    std::ostringstream os;
    os << "minimum of the principal symbol is " << c;
    fail(ErrorKind::NonElliptic, os.str());
  }
  return c;
}

DiagonalizingTransform diagonalize(const OperatorSpec& spec, const Vec& theta) {
  ellipticity_check(spec, theta);
  const Symbols s = symbols(spec, theta);
  DiagonalizingTransform t;
  const Vec ainv_b = s.a.llt().solve(s.b);
  t.w = 0.5 * ainv_b;
  t.c_tilde = s.c - 0.25 * s.b.dot(ainv_b);
  t.a = s.a;
  return t;
}

}  // namespace spdeloc
