#include "dmx/moments.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "dmx/kernels.hpp"

namespace dmx {

MomentTable::MomentTable(int dim, int order) : dim_(dim), order_(order) {
  if (dim < 1) throw std::invalid_argument("MomentTable: dim must be >= 1");
  if (order < 0) throw std::invalid_argument("MomentTable: order must be >= 0");
}

void MomentTable::set(const MultiIndex& kappa, double value) {
  if (kappa.dim() != dim_) throw std::invalid_argument("MomentTable: index dimension mismatch");
  if (kappa.order() > order_) throw std::invalid_argument("MomentTable: index order exceeds table order");
  if (kappa.is_zero() && value != 1.0) {
    throw std::invalid_argument("MomentTable: the zero-index entry must be 1");
  }
  entries_[kappa] = value;
}

std::optional<double> MomentTable::get(const MultiIndex& kappa) const {
  auto it = entries_.find(kappa);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

DiracMixture DiracMixture::equal_weights(Eigen::MatrixXd locations) {
  DiracMixture dm;
  const auto count = locations.cols();
  dm.locations = std::move(locations);
  dm.weights = Eigen::VectorXd::Constant(count, 1.0 / static_cast<double>(count));
  return dm;
}

void DiracMixture::validate() const {
  if (locations.rows() < 1 || locations.cols() < 1) {
    throw std::invalid_argument("DiracMixture: empty mixture");
  }
  if (weights.size() != locations.cols()) {
    throw std::invalid_argument("DiracMixture: weight count mismatch");
  }
  for (int i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0)) throw std::invalid_argument("DiracMixture: weights must be positive");
  }
  if (std::abs(weights.sum() - 1.0) > 1e-12) {
    throw std::invalid_argument("DiracMixture: weights must sum to 1");
  }
  if (count() > 1 && !(min_pairwise_distance() > 0.0)) {
    throw std::invalid_argument("DiracMixture: locations must be pairwise distinct");
  }
}

double DiracMixture::min_pairwise_distance() const {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < count(); ++i) {
    for (int j = i + 1; j < count(); ++j) {
      best = std::min(best, (locations.col(i) - locations.col(j)).norm());
    }
  }
  return best;
}

void ScalarGaussian::validate() const {
  if (!(stddev > 0.0)) throw std::invalid_argument("ScalarGaussian: stddev must be positive");
}

void ScalarGaussianMixture::validate() const {
  if (components.empty()) throw std::invalid_argument("ScalarGaussianMixture: no components");
  double sum = 0.0;
  for (const auto& [w, g] : components) {
    if (w < 0.0) throw std::invalid_argument("ScalarGaussianMixture: negative weight");
    g.validate();
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("ScalarGaussianMixture: weights must sum to 1");
  }
}

MomentTable dirac_moments(const DiracMixture& dm, int order) {
  if (order < 0) throw std::invalid_argument("dirac_moments: order must be >= 0");
  const auto indices = enumerate_indices(dm.dim(), order);
  const auto basis = kernels::make_basis(dm.dim(), indices);
  Eigen::VectorXd values;
  kernels::moment_values(dm.locations, dm.weights, basis, 0, values);
  MomentTable table(dm.dim(), order);
  for (int r = 0; r < basis.rows(); ++r) {
    table.set(basis.indices[static_cast<std::size_t>(r)],
              basis.indices[static_cast<std::size_t>(r)].is_zero() ? 1.0 : values[r]);
  }
  return table;
}

Eigen::MatrixXd dirac_moment_gradient(const DiracMixture& dm, const MultiIndex& kappa) {
  if (kappa.dim() != dm.dim()) {
    throw std::invalid_argument("dirac_moment_gradient: index dimension mismatch");
  }
  const auto basis = kernels::make_basis(dm.dim(), {kappa});
  Eigen::MatrixXd jac;
  kernels::moment_jacobian(dm.locations, dm.weights, basis, jac);
  Eigen::MatrixXd out(dm.dim(), dm.count());
  for (int i = 0; i < dm.count(); ++i) {
    for (int k = 0; k < dm.dim(); ++k) out(k, i) = jac(0, i * dm.dim() + k);
  }
  return out;
}

double gaussian_central_moment(int i, double sigma) {
  if (i < 0) throw std::invalid_argument("gaussian_central_moment: order must be >= 0");
  if (i == 0) return 1.0;
  if (i % 2 == 1) return 0.0;
  double dfact = 1.0;  // (i-1)!! over the odd integers
  for (int j = 3; j <= i - 1; j += 2) dfact *= static_cast<double>(j);
  return dfact * pow_int(sigma, i);
}

double gaussian_raw_moment(int i, const ScalarGaussian& g) {
  if (i < 0) throw std::invalid_argument("gaussian_raw_moment: order must be >= 0");
  g.validate();
  double sum = 0.0;
  for (int k = 0; k <= i; ++k) {
    sum += static_cast<double>(binomial(i, k)) * gaussian_central_moment(i - k, g.stddev) *
           pow_int(g.mean, k);
  }
  return sum;
}

std::vector<double> mixture_raw_moments(const ScalarGaussianMixture& gm, int order) {
  if (order < 0) throw std::invalid_argument("mixture_raw_moments: order must be >= 0");
  gm.validate();
  std::vector<double> out(static_cast<std::size_t>(order) + 1, 0.0);
  out[0] = 1.0;
  for (int i = 1; i <= order; ++i) {
    double sum = 0.0;
    for (const auto& [w, g] : gm.components) {
      sum += w * gaussian_raw_moment(i, g);
    }
    out[static_cast<std::size_t>(i)] = sum;
  }
  return out;
}

std::vector<double> mixture_central_moments(const std::vector<double>& raw) {
  if (raw.empty() || raw[0] != 1.0) {
    throw std::invalid_argument("mixture_central_moments: raw moments must start with E_0 = 1");
  }
  const int n = static_cast<int>(raw.size()) - 1;
  const double mean = n >= 1 ? raw[1] : 0.0;
  std::vector<double> out(raw.size(), 0.0);
  out[0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    double sum = 0.0;
    for (int j = 0; j <= i; ++j) {
      sum += static_cast<double>(binomial(i, j)) * raw[static_cast<std::size_t>(i - j)] *
             pow_int(-mean, j);
    }
    out[static_cast<std::size_t>(i)] = sum;
  }
  return out;
}

std::int64_t binomial(int n, int k) {
  if (n < 0 || k < 0 || k > n) return 0;
  if (n > 62) throw std::domain_error("binomial: n exceeds exact 64-bit range");
  k = std::min(k, n - k);
  std::vector<std::int64_t> row(static_cast<std::size_t>(k) + 1, 0);
  row[0] = 1;
  for (int r = 1; r <= n; ++r) {
    for (int c = std::min(r, k); c >= 1; --c) row[static_cast<std::size_t>(c)] += row[static_cast<std::size_t>(c - 1)];
  }
  return row[static_cast<std::size_t>(k)];
}

ResidualResult residual(const MomentTable& actual, const MomentTable& target,
                        const MomentWeights* weights) {
  if (actual.dim() != target.dim()) {
    throw std::invalid_argument("residual: table dimensions differ");
  }
  ResidualResult out;
  std::vector<double> vals;
  for (const auto& [kappa, tv] : target.entries()) {
    const auto av = actual.get(kappa);
    if (!av) continue;  // residuals run over the intersection of specified indices
    double w = 1.0;
    if (weights != nullptr) {
      auto it = weights->find(kappa);
      if (it != weights->end()) w = it->second;
    }
    out.indices.push_back(kappa);
    vals.push_back(w * (*av - tv));
  }
  out.values = Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  out.norm = out.values.norm();
  return out;
}

MomentWeights scaled_weights(const MomentTable& target) {
  MomentWeights w;
  for (const auto& [kappa, v] : target.entries()) {
    w[kappa] = 1.0 / std::max(1.0, std::abs(v));
  }
  return w;
}

}  // namespace dmx
