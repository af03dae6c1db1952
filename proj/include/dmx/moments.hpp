#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "dmx/multi_index.hpp"

namespace dmx {

/// Sparse table of power moments up to a maximum total order. Indices that
/// are not stored are unspecified, never implicitly zero.
class MomentTable {
 public:
  using Map = std::map<MultiIndex, double, GradedLexLess>;

  MomentTable(int dim, int order);

  int dim() const { return dim_; }
  int order() const { return order_; }

  /// Inserts or overwrites an entry. Throws std::invalid_argument when the
  /// index does not fit the table or when the zero index is set to != 1.
  void set(const MultiIndex& kappa, double value);

  std::optional<double> get(const MultiIndex& kappa) const;
  bool contains(const MultiIndex& kappa) const { return entries_.count(kappa) > 0; }
  std::size_t size() const { return entries_.size(); }
  const Map& entries() const { return entries_; }

 private:
  int dim_;
  int order_;
  Map entries_;
};

/// Equally spaced point masses are the degenerate case; in general this is
/// L weighted Dirac components at pairwise distinct locations. Locations are
/// stored one component per column (N x L).
struct DiracMixture {
  Eigen::MatrixXd locations;
  Eigen::VectorXd weights;

  int dim() const { return static_cast<int>(locations.rows()); }
  int count() const { return static_cast<int>(locations.cols()); }

  static DiracMixture equal_weights(Eigen::MatrixXd locations);

  /// Throws std::invalid_argument when weights are not positive and summing
  /// to one (tolerance 1e-12) or when two locations coincide.
  void validate() const;

  double min_pairwise_distance() const;
};

struct ScalarGaussian {
  double mean = 0.0;
  double stddev = 1.0;

  void validate() const;
};

struct ScalarGaussianMixture {
  std::vector<std::pair<double, ScalarGaussian>> components;  // (weight, density)

  void validate() const;
};

/// Power moments of a Dirac mixture for every |kappa| <= order. The zero
/// index entry is exactly 1.
MomentTable dirac_moments(const DiracMixture& dm, int order);

/// d e_kappa / d locations, one column per component (N x L). Entries whose
/// exponent is zero are exactly zero.
Eigen::MatrixXd dirac_moment_gradient(const DiracMixture& dm, const MultiIndex& kappa);

/// Central moment of N(m, sigma^2): (i-1)!! sigma^i for even i, 0 for odd i.
double gaussian_central_moment(int i, double sigma);

/// Raw moment E{x^i} of a scalar Gaussian from the central-moment expansion.
double gaussian_raw_moment(int i, const ScalarGaussian& g);

/// Raw moments E_0..E_order of a scalar Gaussian mixture. E_0 is exactly 1.
std::vector<double> mixture_raw_moments(const ScalarGaussianMixture& gm, int order);

/// Central moments C_0..C_n from raw moments E_0..E_n. C_1 is exactly 0.
std::vector<double> mixture_central_moments(const std::vector<double>& raw);

/// Binomial coefficient via the Pascal recurrence, exact for n <= 62.
std::int64_t binomial(int n, int k);

/// Per-index residual (actual - target) over the target's specified indices,
/// in graded lexicographic order. Entries are optionally multiplied by a
/// per-index weight before entering the vector and its 2-norm.
struct ResidualResult {
  std::vector<MultiIndex> indices;
  Eigen::VectorXd values;
  double norm = 0.0;
};

using MomentWeights = std::map<MultiIndex, double, GradedLexLess>;

ResidualResult residual(const MomentTable& actual, const MomentTable& target,
                        const MomentWeights* weights = nullptr);

/// The optional down-weighting of large target entries: w = 1 / max(1, |value|).
MomentWeights scaled_weights(const MomentTable& target);

}  // namespace dmx
