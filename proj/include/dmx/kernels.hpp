#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "dmx/multi_index.hpp"

namespace dmx::kernels {

/// Flattened index set shared by the moment kernels. Rows follow the order of
/// the `indices` argument handed to make_basis.
struct MomentBasis {
  int dim = 0;
  std::vector<MultiIndex> indices;
  std::vector<int> exps;  // row-major, indices.size() x dim

  int rows() const { return static_cast<int>(indices.size()); }
};

MomentBasis make_basis(int dim, std::vector<MultiIndex> indices);

/// out[r] = sum_i w_i * x_i^kappa_r.
///
/// pair_offset > 0 reorganizes the sum over components into pairs (i, i +
/// pair_offset); a component and its mirror are added before moving on, which
/// cancels odd-order terms of a point-symmetric mixture exactly. Requires
/// L == 2 * pair_offset in that case.
void moment_values_serial(const Eigen::MatrixXd& locations, const Eigen::VectorXd& weights,
                          const MomentBasis& basis, int pair_offset, Eigen::VectorXd& out);
void moment_values_parallel(const Eigen::MatrixXd& locations, const Eigen::VectorXd& weights,
                            const MomentBasis& basis, int pair_offset, Eigen::VectorXd& out);

/// Full-space Jacobian of the moment vector: rows follow the basis, column
/// i*N + k is the derivative with respect to coordinate k of component i.
void moment_jacobian_serial(const Eigen::MatrixXd& locations, const Eigen::VectorXd& weights,
                            const MomentBasis& basis, Eigen::MatrixXd& out);
void moment_jacobian_parallel(const Eigen::MatrixXd& locations, const Eigen::VectorXd& weights,
                              const MomentBasis& basis, Eigen::MatrixXd& out);

/// Collision constraint values in normalized squared form, one entry per
/// pair (i, j):
///   g = (d_i + d_j)^2 / (shrink * ||x_i - x_j||)^2 - 1   (feasible when g <= 0).
/// The squared distance is floored at 1e-24, so coincident locations yield a
/// large but finite violation.
void collision_values_serial(const Eigen::MatrixXd& locations, const Eigen::VectorXd& diameters,
                             double shrink, const std::vector<std::pair<int, int>>& pairs,
                             Eigen::VectorXd& out);
void collision_values_parallel(const Eigen::MatrixXd& locations, const Eigen::VectorXd& diameters,
                               double shrink, const std::vector<std::pair<int, int>>& pairs,
                               Eigen::VectorXd& out);

/// Runtime switch between the serial reference kernels and the OpenMP ones.
/// Defaults to parallel when compiled with OpenMP. Both variants produce
/// bitwise identical results; the switch exists for benchmarking.
bool parallel_enabled();
void set_parallel(bool enabled);

void moment_values(const Eigen::MatrixXd& locations, const Eigen::VectorXd& weights,
                   const MomentBasis& basis, int pair_offset, Eigen::VectorXd& out);
void moment_jacobian(const Eigen::MatrixXd& locations, const Eigen::VectorXd& weights,
                     const MomentBasis& basis, Eigen::MatrixXd& out);
void collision_values(const Eigen::MatrixXd& locations, const Eigen::VectorXd& diameters,
                      double shrink, const std::vector<std::pair<int, int>>& pairs,
                      Eigen::VectorXd& out);

/// All index pairs i < j for L components.
std::vector<std::pair<int, int>> all_pairs(int count);

}  // namespace dmx::kernels
