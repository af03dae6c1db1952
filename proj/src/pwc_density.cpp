#include "dmx/pwc_density.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dmx {

double sphere_volume(int dim, double d) {
  if (dim < 1) throw std::invalid_argument("sphere_volume: dim must be >= 1");
  if (!(d > 0.0)) throw std::invalid_argument("sphere_volume: d must be positive");
  return std::exp(log_unit_ball_volume(dim)) * pow_int(d, dim);
}

double log_unit_ball_volume(int dim) {
  return 0.5 * dim * std::log(M_PI) - std::lgamma(0.5 * dim + 1.0);
}

Eigen::VectorXd heights(const PwcDensity& p) {
  Eigen::VectorXd h(p.count());
  for (int i = 0; i < p.count(); ++i) {
    h[i] = p.mixture.weights[i] / sphere_volume(p.dim(), p.diameters[i]);
  }
  return h;
}

double entropy(const PwcDensity& p) {
  const int n = p.dim();
  double sum = 0.0;
  for (int i = 0; i < p.count(); ++i) {
    const double w = p.mixture.weights[i];
    sum += w * (n * std::log(p.diameters[i]) - std::log(w));
  }
  return log_unit_ball_volume(n) + sum;
}

Eigen::VectorXd entropy_gradient_d(const PwcDensity& p) {
  Eigen::VectorXd g(p.count());
  for (int i = 0; i < p.count(); ++i) {
    g[i] = p.dim() * p.mixture.weights[i] / p.diameters[i];
  }
  return g;
}

FeasibilityReport check_feasible(const Eigen::MatrixXd& locations,
                                 const Eigen::VectorXd& diameters, double eps_slack) {
  FeasibilityReport rep;
  const int count = static_cast<int>(locations.cols());
  for (int i = 0; i < count; ++i) {
    if (!(diameters[i] > 0.0)) {
      rep.nonpositive.push_back(i);
      rep.feasible = false;
    }
  }
  const double shrink = 1.0 - eps_slack;
  for (int i = 0; i < count; ++i) {
    for (int j = i + 1; j < count; ++j) {
      const double dist = (locations.col(i) - locations.col(j)).norm();
      if (diameters[i] + diameters[j] > shrink * dist) {
        rep.overlapping.emplace_back(i, j);
        rep.feasible = false;
      }
    }
  }
  return rep;
}

namespace {

// Constraint pairs for the diameter problem with fixed locations: sorted
// neighbors in one dimension, all pairs otherwise.
std::vector<std::pair<int, int>> diameter_pairs(const DiracMixture& dm) {
  const int count = dm.count();
  std::vector<std::pair<int, int>> pairs;
  if (dm.dim() == 1) {
    std::vector<int> order(static_cast<std::size_t>(count));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return dm.locations(0, a) < dm.locations(0, b); });
    for (int k = 0; k + 1 < count; ++k) {
      pairs.emplace_back(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k + 1)]);
    }
  } else {
    for (int i = 0; i < count; ++i) {
      for (int j = i + 1; j < count; ++j) pairs.emplace_back(i, j);
    }
  }
  return pairs;
}

}  // namespace

Eigen::VectorXd max_entropy_diameters(const DiracMixture& dm, const SolverOptions& opts) {
  const int count = dm.count();
  const int n = dm.dim();
  for (int i = 0; i < dm.weights.size(); ++i) {
    if (!(dm.weights[i] > 0.0)) {
      throw std::invalid_argument("max_entropy_diameters: weights must be positive");
    }
  }
  if (count > 1 && !(dm.min_pairwise_distance() > 0.0)) {
    throw std::invalid_argument("max_entropy_diameters: coincident locations");
  }
  if (count == 1) {
    if (!opts.d_max) {
      throw std::domain_error(
          "max_entropy_diameters: unbounded (single component, no d_max cap)");
    }
    return Eigen::VectorXd::Constant(1, *opts.d_max);
  }

  const double shrink = 1.0 - opts.eps_slack;
  const auto pairs = diameter_pairs(dm);
  Eigen::VectorXd gaps(static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    gaps[static_cast<Eigen::Index>(p)] =
        shrink * (dm.locations.col(pairs[p].first) - dm.locations.col(pairs[p].second)).norm();
  }

  // half the distance to the nearest neighbor, shrunk by the slack
  Eigen::VectorXd d0(count);
  for (int i = 0; i < count; ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (int j = 0; j < count; ++j) {
      if (j == i) continue;
      nearest = std::min(nearest, (dm.locations.col(i) - dm.locations.col(j)).norm());
    }
    d0[i] = shrink * 0.5 * nearest;
    if (opts.d_max) d0[i] = std::min(d0[i], *opts.d_max * (1.0 - 1e-9));
  }

  const Eigen::VectorXd w = dm.weights;
  const double c_n = log_unit_ball_volume(n);
  double w_log_w = 0.0;
  for (int i = 0; i < count; ++i) w_log_w += w[i] * std::log(w[i]);

  ScalarFn objective = [&, n, c_n, w_log_w](const Eigen::VectorXd& u, Eigen::VectorXd* grad) {
    if (grad != nullptr) *grad = static_cast<double>(n) * w;
    return c_n - w_log_w + static_cast<double>(n) * w.dot(u);
  };

  const bool capped = opts.d_max.has_value();
  const double log_cap = capped ? std::log(*opts.d_max) : 0.0;
  VectorFn inequality = [&, capped, log_cap](const Eigen::VectorXd& u, Eigen::MatrixXd* jac) {
    const Eigen::VectorXd d = u.array().exp();
    const int m = static_cast<int>(pairs.size()) + (capped ? count : 0);
    Eigen::VectorXd g(m);
    if (jac != nullptr) jac->setZero(m, count);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto [i, j] = pairs[p];
      const auto row = static_cast<Eigen::Index>(p);
      g[row] = (d[i] + d[j]) / gaps[row] - 1.0;
      if (jac != nullptr) {
        (*jac)(row, i) = d[i] / gaps[row];
        (*jac)(row, j) = d[j] / gaps[row];
      }
    }
    if (capped) {
      for (int i = 0; i < count; ++i) {
        const auto row = static_cast<Eigen::Index>(pairs.size()) + i;
        g[row] = u[i] - log_cap;
        if (jac != nullptr) (*jac)(row, i) = 1.0;
      }
    }
    return g;
  };

  const Eigen::VectorXd u0 = d0.array().log();
  const SolveResult sol = maximize_constrained(objective, nullptr, inequality, u0, opts);
  Eigen::VectorXd d = sol.x.array().exp();

  // pull the result into the feasible set; rounding right at the boundary is
  // scaled off by 1e-12
  double alpha = 1.0;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [i, j] = pairs[p];
    alpha = std::min(alpha, gaps[static_cast<Eigen::Index>(p)] / (d[i] + d[j]));
  }
  d *= alpha * (1.0 - 1e-12);
  if (opts.d_max) d = d.cwiseMin(*opts.d_max);
  return d;
}

double evaluate(const PwcDensity& p, Eigen::Ref<const Eigen::VectorXd> x) {
  if (x.size() != p.dim()) throw std::invalid_argument("evaluate: point dimension mismatch");
  for (int i = 0; i < p.count(); ++i) {
    if ((x - p.mixture.locations.col(i)).norm() <= p.diameters[i]) {
      return p.mixture.weights[i] / sphere_volume(p.dim(), p.diameters[i]);
    }
  }
  return 0.0;
}

}  // namespace dmx
