#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "dmx/moments.hpp"
#include "dmx/pwc_density.hpp"
#include "dmx/solver.hpp"

namespace dmx {

enum class Determinedness { overdetermined, fully_determined, underdetermined };

std::string to_string(Determinedness c);

/// A moment-matching problem: find L locations in R^dim whose mixture
/// reproduces the target table. Symmetric problems optimize only half of the
/// components; the rest are reflections through the prescribed mean.
struct DmaProblem {
  int dim = 1;
  int component_count = 1;
  MomentTable target;
  bool symmetric = false;
  std::optional<Eigen::VectorXd> prescribed_mean{};
  std::optional<Eigen::VectorXd> weights{};        // default: equal 1/L
  std::optional<MomentWeights> moment_weights{};   // residual weighting for least squares
  SolverOptions options{};

  DmaProblem(int dim_, int component_count_, MomentTable target_)
      : dim(dim_), component_count(component_count_), target(std::move(target_)) {}

  void validate() const;
  Eigen::VectorXd component_weights() const;
};

struct SolutionReport {
  DiracMixture mixture;
  Eigen::VectorXd diameters;
  double entropy = 0.0;
  double moment_residual_norm = 0.0;
  ResidualResult residuals;
  Determinedness determinedness = Determinedness::underdetermined;
  SolverTrace trace;
  std::uint64_t seed_used = 0;
  bool converged = false;
  bool feasible = false;
};

/// Compares the number of location parameters L*dim against the number of
/// specified target entries. Symmetry halves the free variables but not the
/// parameter count used here.
Determinedness classify(const DmaProblem& problem);

/// Standard-normal start vector for the free locations (all components, or
/// only the free half under symmetry), flattened component-major.
Eigen::VectorXd init_random(std::uint64_t seed, int component_count, int dim, bool symmetric,
                            const std::optional<Eigen::VectorXd>& prescribed_mean);

/// Appends the reflection of every component through `mean`. Weights are
/// copied, so the mixture mean equals `mean` (exactly when mean is zero).
/// Throws std::invalid_argument when two inputs coincide or an input sits on
/// the mean (its reflection would land on itself).
DiracMixture expand_symmetric(const Eigen::MatrixXd& half_locations, const Eigen::VectorXd& mean,
                              const std::optional<Eigen::VectorXd>& half_weights = {});

/// Joint optimization of locations and sphere sizes: maximize the entropy of
/// the piecewise constant companion density subject to the moment equalities
/// and the pairwise disjointness inequalities. Requires the underdetermined
/// case. Best feasible restart by entropy is returned.
SolutionReport solve_max_entropy(const DmaProblem& problem);

/// Root solve of the moment equations alone (no regularization); sphere sizes
/// are filled in afterwards so entropies are comparable across methods.
SolutionReport solve_lm_baseline(const DmaProblem& problem);

/// Weighted least-squares fit for more target moments than parameters.
SolutionReport solve_overdetermined(const DmaProblem& problem);

/// Root solve with restarts for the square case; the first converged root in
/// seed order is returned.
SolutionReport solve_fully_determined(const DmaProblem& problem);

/// Dispatch on classify(): max-entropy, root solve, or least squares.
SolutionReport solve_auto(const DmaProblem& problem);

/// Variable layout of the joint solve: the flattened free locations followed
/// by the log sphere sizes of the free components. The assembled callbacks
/// below are shared between the solver and the gradient checks.
struct JointLayout {
  int dim = 1;
  int total_components = 1;
  int free_components = 1;
  bool symmetric = false;
  Eigen::VectorXd mean;     // size dim when symmetric
  Eigen::VectorXd weights;  // full length

  int location_vars() const { return free_components * dim; }
  int num_vars() const { return location_vars() + free_components; }
  int pair_offset() const { return symmetric ? free_components : 0; }
  int component_block(int comp) const { return symmetric && comp >= free_components ? comp - free_components : comp; }
  double component_sign(int comp) const { return symmetric && comp >= free_components ? -1.0 : 1.0; }

  Eigen::MatrixXd locations(const Eigen::VectorXd& z) const;
  Eigen::VectorXd diameters(const Eigen::VectorXd& z) const;
};

JointLayout make_joint_layout(const DmaProblem& problem);
ScalarFn joint_entropy_objective(const JointLayout& layout);
VectorFn joint_moment_equality(const JointLayout& layout, const MomentTable& target);
VectorFn joint_collision_inequality(const JointLayout& layout, double eps_slack,
                                    std::optional<double> d_max);

}  // namespace dmx
