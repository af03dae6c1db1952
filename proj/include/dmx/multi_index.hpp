#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace dmx {

/// Exponent vector kappa indexing a multivariate power moment. Entries are
/// non-negative; the vector length is the problem dimension N.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> exponents);

  static MultiIndex zeros(int dim);

  int dim() const { return static_cast<int>(exps_.size()); }
  /// Total order |kappa| = sum of exponents.
  int order() const;
  int operator[](int k) const { return exps_[static_cast<std::size_t>(k)]; }
  const std::vector<int>& exponents() const { return exps_; }

  bool is_zero() const { return order() == 0; }

  bool operator==(const MultiIndex&) const = default;

 private:
  std::vector<int> exps_;
};

/// Canonical ordering used everywhere an index list is flattened to a vector:
/// ascending total order, ties broken lexicographically on the exponents.
bool graded_lex_less(const MultiIndex& a, const MultiIndex& b);

struct GradedLexLess {
  bool operator()(const MultiIndex& a, const MultiIndex& b) const {
    return graded_lex_less(a, b);
  }
};

/// All indices with |kappa| <= max_order in graded lexicographic order.
std::vector<MultiIndex> enumerate_indices(int dim, int max_order);

/// Number of moments up to max_order: binomial(max_order + dim, dim).
/// Throws std::domain_error outside the supported range dim, max_order <= 16.
std::int64_t count_moments(int dim, int max_order);

/// Integer power by repeated multiplication. Exact sign symmetry:
/// pow_int(-x, e) == (-1)^e * pow_int(x, e) bit for bit.
inline double pow_int(double base, int exponent) {
  double r = 1.0;
  for (int i = 0; i < exponent; ++i) r *= base;
  return r;
}

/// x^kappa = x_1^k1 * ... * x_N^kN. The zero index yields 1 for any x.
double monomial(Eigen::Ref<const Eigen::VectorXd> x, const MultiIndex& kappa);

}  // namespace dmx
