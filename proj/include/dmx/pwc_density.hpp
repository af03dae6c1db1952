#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "dmx/moments.hpp"
#include "dmx/solver.hpp"

namespace dmx {

/// A Dirac mixture together with per-component sphere sizes d_i. Component i
/// covers the ball {x : ||x - x_i|| <= d_i}; the density is constant on each
/// ball and the balls must be disjoint. Moments are never computed from this
/// density; it only measures how homogeneously the mixture spreads out.
struct PwcDensity {
  DiracMixture mixture;
  Eigen::VectorXd diameters;

  int dim() const { return mixture.dim(); }
  int count() const { return mixture.count(); }
};

/// Volume pi^{N/2} / Gamma(N/2 + 1) * d^N of the ball of size d in N dims.
double sphere_volume(int dim, double d);

/// log of the unit-ball volume; the dimension constant in the entropy.
double log_unit_ball_volume(int dim);

/// Component heights h_i = w_i / V_N(d_i); each ball then carries mass w_i.
Eigen::VectorXd heights(const PwcDensity& p);

/// Shannon entropy (nats): c_N - sum_i w_i log(w_i / d_i^N).
double entropy(const PwcDensity& p);

/// d entropy / d d_i = N w_i / d_i, strictly positive.
Eigen::VectorXd entropy_gradient_d(const PwcDensity& p);

struct FeasibilityReport {
  bool feasible = true;
  std::vector<int> nonpositive;                  // components with d_i <= 0
  std::vector<std::pair<int, int>> overlapping;  // pairs with d_i + d_j > (1-eps)*dist
};

/// Verdict on d_i > 0 and pairwise disjointness with multiplicative slack:
/// d_i + d_j <= (1 - eps_slack) * ||x_i - x_j|| for all i < j.
FeasibilityReport check_feasible(const Eigen::MatrixXd& locations,
                                 const Eigen::VectorXd& diameters, double eps_slack);

/// Maximum-entropy sphere sizes for fixed locations. Scalar problems use the
/// reduced neighbor constraints of the sorted ordering; higher dimensions use
/// all pairs. The result is always strictly feasible under opts.eps_slack.
///
/// Throws std::invalid_argument on coincident locations and std::domain_error
/// when the problem is unbounded (a single component with no opts.d_max).
Eigen::VectorXd max_entropy_diameters(const DiracMixture& dm, const SolverOptions& opts);

/// Pointwise density value: the height of the ball containing x, or 0.
double evaluate(const PwcDensity& p, Eigen::Ref<const Eigen::VectorXd> x);

}  // namespace dmx
