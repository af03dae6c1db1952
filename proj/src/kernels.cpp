#include "dmx/kernels.hpp"

#include <algorithm>
#include <stdexcept>

namespace dmx::kernels {

namespace {

bool g_parallel =
#ifdef _OPENMP
    true;
#else
    false;
#endif

inline double monomial_flat(const Eigen::MatrixXd& locations, int comp, const int* exps, int dim) {
  double r = 1.0;
  for (int k = 0; k < dim; ++k) {
    r *= pow_int(locations(k, comp), exps[k]);
  }
  return r;
}

// One output row of the moment vector; the summation order over components is
// fixed so serial and parallel variants agree bit for bit.
inline double moment_row(const Eigen::MatrixXd& locations, const Eigen::VectorXd& weights,
                         const int* exps, int dim, int pair_offset) {
  const int count = static_cast<int>(locations.cols());
  double acc = 0.0;
  if (pair_offset > 0) {
    for (int i = 0; i < pair_offset; ++i) {
      acc += weights[i] * monomial_flat(locations, i, exps, dim) +
             weights[i + pair_offset] * monomial_flat(locations, i + pair_offset, exps, dim);
    }
  } else {
    for (int i = 0; i < count; ++i) {
      acc += weights[i] * monomial_flat(locations, i, exps, dim);
    }
  }
  return acc;
}

// Jacobian block for one (row, component): out[k] = w * d monomial / d x_k.
inline void moment_grad_block(const Eigen::MatrixXd& locations, double weight, int comp,
                              const int* exps, int dim, double* out) {
  // prefix/suffix products of the per-dimension powers, skipping dimension k
  double pows[32];
  double dpows[32];
  for (int k = 0; k < dim; ++k) {
    const double x = locations(k, comp);
    pows[k] = pow_int(x, exps[k]);
    dpows[k] = exps[k] > 0 ? static_cast<double>(exps[k]) * pow_int(x, exps[k] - 1) : 0.0;
  }
  for (int k = 0; k < dim; ++k) {
    if (exps[k] == 0) {
      out[k] = 0.0;
      continue;
    }
    double rest = 1.0;
    for (int j = 0; j < dim; ++j) {
      if (j != k) rest *= pows[j];
    }
    out[k] = weight * dpows[k] * rest;
  }
}

inline double collision_pair(const Eigen::MatrixXd& locations, const Eigen::VectorXd& diameters,
                             double shrink, int i, int j) {
  const int dim = static_cast<int>(locations.rows());
  double dist2 = 0.0;
  for (int k = 0; k < dim; ++k) {
    const double d = locations(k, i) - locations(k, j);
    dist2 += d * d;
  }
  const double s = diameters[i] + diameters[j];
  return s * s / std::max(shrink * shrink * dist2, 1e-24) - 1.0;
}

void check_inputs(const Eigen::MatrixXd& locations, const Eigen::VectorXd& weights,
                  const MomentBasis& basis, int pair_offset) {
  if (static_cast<int>(locations.rows()) != basis.dim) {
    throw std::invalid_argument("moment kernel: dimension mismatch");
  }
  if (locations.cols() != weights.size()) {
    throw std::invalid_argument("moment kernel: weight count mismatch");
  }
  if (basis.dim > 32) {
    throw std::invalid_argument("moment kernel: dimension cap is 32");
  }
  if (pair_offset > 0 && locations.cols() != 2 * pair_offset) {
    throw std::invalid_argument("moment kernel: pair_offset requires L == 2*pair_offset");
  }
}

}  // namespace

MomentBasis make_basis(int dim, std::vector<MultiIndex> indices) {
  MomentBasis basis;
  basis.dim = dim;
  basis.exps.reserve(indices.size() * static_cast<std::size_t>(dim));
  for (const MultiIndex& k : indices) {
    if (k.dim() != dim) throw std::invalid_argument("make_basis: index dimension mismatch");
    for (int j = 0; j < dim; ++j) basis.exps.push_back(k[j]);
  }
  basis.indices = std::move(indices);
  return basis;
}

void moment_values_serial(const Eigen::MatrixXd& locations, const Eigen::VectorXd& weights,
                          const MomentBasis& basis, int pair_offset, Eigen::VectorXd& out) {
  check_inputs(locations, weights, basis, pair_offset);
  const int rows = basis.rows();
  out.resize(rows);
  for (int r = 0; r < rows; ++r) {
    out[r] = moment_row(locations, weights, basis.exps.data() + r * basis.dim, basis.dim,
                        pair_offset);
  }
}

void moment_values_parallel(const Eigen::MatrixXd& locations, const Eigen::VectorXd& weights,
                            const MomentBasis& basis, int pair_offset, Eigen::VectorXd& out) {
  check_inputs(locations, weights, basis, pair_offset);
  const int rows = basis.rows();
  out.resize(rows);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    out[r] = moment_row(locations, weights, basis.exps.data() + r * basis.dim, basis.dim,
                        pair_offset);
  }
}

void moment_jacobian_serial(const Eigen::MatrixXd& locations, const Eigen::VectorXd& weights,
                            const MomentBasis& basis, Eigen::MatrixXd& out) {
  check_inputs(locations, weights, basis, 0);
  const int rows = basis.rows();
  const int count = static_cast<int>(locations.cols());
  const int dim = basis.dim;
  out.resize(rows, count * dim);
  double block[32];
  for (int r = 0; r < rows; ++r) {
    for (int i = 0; i < count; ++i) {
      moment_grad_block(locations, weights[i], i, basis.exps.data() + r * dim, dim, block);
      for (int k = 0; k < dim; ++k) out(r, i * dim + k) = block[k];
    }
  }
}

void moment_jacobian_parallel(const Eigen::MatrixXd& locations, const Eigen::VectorXd& weights,
                              const MomentBasis& basis, Eigen::MatrixXd& out) {
  check_inputs(locations, weights, basis, 0);
  const int rows = basis.rows();
  const int count = static_cast<int>(locations.cols());
  const int dim = basis.dim;
  out.resize(rows, count * dim);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    double block[32];
    for (int i = 0; i < count; ++i) {
      moment_grad_block(locations, weights[i], i, basis.exps.data() + r * dim, dim, block);
      for (int k = 0; k < dim; ++k) out(r, i * dim + k) = block[k];
    }
  }
}

void collision_values_serial(const Eigen::MatrixXd& locations, const Eigen::VectorXd& diameters,
                             double shrink, const std::vector<std::pair<int, int>>& pairs,
                             Eigen::VectorXd& out) {
  const int n = static_cast<int>(pairs.size());
  out.resize(n);
  for (int p = 0; p < n; ++p) {
    out[p] = collision_pair(locations, diameters, shrink, pairs[p].first, pairs[p].second);
  }
}

void collision_values_parallel(const Eigen::MatrixXd& locations, const Eigen::VectorXd& diameters,
                               double shrink, const std::vector<std::pair<int, int>>& pairs,
                               Eigen::VectorXd& out) {
  const int n = static_cast<int>(pairs.size());
  out.resize(n);
#pragma omp parallel for schedule(static)
  for (int p = 0; p < n; ++p) {
    out[p] = collision_pair(locations, diameters, shrink, pairs[p].first, pairs[p].second);
  }
}

bool parallel_enabled() { return g_parallel; }

void set_parallel(bool enabled) {
#ifdef _OPENMP
  g_parallel = enabled;
#else
  g_parallel = false;
  (void)enabled;
#endif
}

void moment_values(const Eigen::MatrixXd& locations, const Eigen::VectorXd& weights,
                   const MomentBasis& basis, int pair_offset, Eigen::VectorXd& out) {
  if (g_parallel) {
    moment_values_parallel(locations, weights, basis, pair_offset, out);
  } else {
    moment_values_serial(locations, weights, basis, pair_offset, out);
  }
}

void moment_jacobian(const Eigen::MatrixXd& locations, const Eigen::VectorXd& weights,
                     const MomentBasis& basis, Eigen::MatrixXd& out) {
  if (g_parallel) {
    moment_jacobian_parallel(locations, weights, basis, out);
  } else {
    moment_jacobian_serial(locations, weights, basis, out);
  }
}

void collision_values(const Eigen::MatrixXd& locations, const Eigen::VectorXd& diameters,
                      double shrink, const std::vector<std::pair<int, int>>& pairs,
                      Eigen::VectorXd& out) {
  if (g_parallel) {
    collision_values_parallel(locations, diameters, shrink, pairs, out);
  } else {
    collision_values_serial(locations, diameters, shrink, pairs, out);
  }
}

std::vector<std::pair<int, int>> all_pairs(int count) {
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(count) * (count - 1) / 2);
  for (int i = 0; i < count; ++i) {
    for (int j = i + 1; j < count; ++j) pairs.emplace_back(i, j);
  }
  return pairs;
}

}  // namespace dmx::kernels
