#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Core>

namespace dmx {

struct SolverOptions {
  double tol_eq = 1e-6;       // equality-residual and inequality-violation tolerance
  double tol_obj = 1e-8;      // stationarity tolerance on the merit gradient
  double eps_slack = 1e-3;    // multiplicative slack on collision constraints
  int max_outer = 50;
  int max_inner = 500;
  double penalty_init = 10.0;
  double penalty_growth = 5.0;
  double penalty_cap = 1e12;
  std::uint64_t seed = 0;
  int restarts = 5;
  std::optional<double> d_max{};  // optional cap on sphere diameters

  void validate() const;
};

struct SolverTrace {
  int outer_iterations = 0;
  int inner_iterations = 0;
  double final_objective = std::numeric_limits<double>::quiet_NaN();
  double max_equality_violation = 0.0;
  double max_inequality_violation = 0.0;
  bool converged = false;
  std::string message;
};

/// Scalar callback; when grad != nullptr it must be filled with the gradient.
using ScalarFn = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

/// Vector callback; when jac != nullptr it must be filled with the Jacobian
/// (one row per output entry).
using VectorFn = std::function<Eigen::VectorXd(const Eigen::VectorXd& x, Eigen::MatrixXd* jac)>;

struct SolveResult {
  Eigen::VectorXd x;
  SolverTrace trace;
};

/// Maximizes `objective` subject to equality(x) = 0 and inequality(x) <= 0.
///
/// Equalities are handled with an augmented Lagrangian (first-order multiplier
/// updates), inequalities with a squared-hinge penalty sharing the growing
/// penalty parameter. Inner iterations are BFGS steps with Armijo
/// backtracking. Either constraint callback may be null. Deterministic for
/// fixed (x0, opts). Non-convergence is reported through the trace, never
/// thrown; a non-finite objective at x0 throws std::invalid_argument.
SolveResult maximize_constrained(const ScalarFn& objective, const VectorFn& equality,
                                 const VectorFn& inequality, const Eigen::VectorXd& x0,
                                 const SolverOptions& opts);

/// Levenberg-Marquardt on 0.5*||residual||^2 with lambda*I damping adapted by
/// the gain ratio (shrink above 0.75, grow below 0.25). Handles over-, fully
/// and underdetermined systems. trace.converged is true when a root was found
/// (residual inf-norm <= tol_eq) or a stationary point was reached; the
/// message says which.
SolveResult lm_root(const VectorFn& residual, const Eigen::VectorXd& x0,
                    const SolverOptions& opts);

/// Central finite differences, error O(step^2).
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double step = 1e-6);

Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double step = 1e-6);

}  // namespace dmx
