#include "dmx/problem.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "dmx/kernels.hpp"
#include "dmx/rng.hpp"

namespace dmx {

std::string to_string(Determinedness c) {
  switch (c) {
    case Determinedness::overdetermined: return "overdetermined";
    case Determinedness::fully_determined: return "fully-determined";
    case Determinedness::underdetermined: return "underdetermined";
  }
  return "unknown";
}

void DmaProblem::validate() const {
  if (dim < 1) throw std::invalid_argument("DmaProblem: dim must be >= 1");
  if (component_count < 1) throw std::invalid_argument("DmaProblem: component_count must be >= 1");
  if (target.dim() != dim) throw std::invalid_argument("DmaProblem: target dimension mismatch");
  if (symmetric) {
    if (component_count % 2 != 0) {
      throw std::invalid_argument("DmaProblem: symmetric problems need an even component count");
    }
    if (!prescribed_mean || prescribed_mean->size() != dim) {
      throw std::invalid_argument("DmaProblem: symmetric problems need a prescribed mean");
    }
  }
  if (weights) {
    if (weights->size() != component_count) {
      throw std::invalid_argument("DmaProblem: weight count mismatch");
    }
    double sum = 0.0;
    for (int i = 0; i < weights->size(); ++i) {
      if (!((*weights)[i] > 0.0)) throw std::invalid_argument("DmaProblem: weights must be positive");
      sum += (*weights)[i];
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("DmaProblem: weights must sum to 1");
    if (symmetric) {
      const int half = component_count / 2;
      for (int i = 0; i < half; ++i) {
        if ((*weights)[i] != (*weights)[i + half]) {
          throw std::invalid_argument("DmaProblem: symmetric weights must match across halves");
        }
      }
    }
  }
  options.validate();
}

Eigen::VectorXd DmaProblem::component_weights() const {
  if (weights) return *weights;
  return Eigen::VectorXd::Constant(component_count, 1.0 / component_count);
}

Determinedness classify(const DmaProblem& problem) {
  problem.validate();
  const long params = static_cast<long>(problem.component_count) * problem.dim;
  const long targets = static_cast<long>(problem.target.size());
  if (params < targets) return Determinedness::overdetermined;
  if (params == targets) return Determinedness::fully_determined;
  return Determinedness::underdetermined;
}

Eigen::VectorXd init_random(std::uint64_t seed, int component_count, int dim, bool symmetric,
                            const std::optional<Eigen::VectorXd>& prescribed_mean) {
  (void)prescribed_mean;  // draws are standard normal regardless of the mean
  const int free_comps = symmetric ? component_count / 2 : component_count;
  Rng rng(seed);
  Eigen::VectorXd eta(static_cast<Eigen::Index>(free_comps) * dim);
  for (Eigen::Index i = 0; i < eta.size(); ++i) eta[i] = rng.next_normal();
  return eta;
}

DiracMixture expand_symmetric(const Eigen::MatrixXd& half_locations, const Eigen::VectorXd& mean,
                              const std::optional<Eigen::VectorXd>& half_weights) {
  const int half = static_cast<int>(half_locations.cols());
  const int n = static_cast<int>(half_locations.rows());
  if (half < 1) throw std::invalid_argument("expand_symmetric: no components");
  if (mean.size() != n) throw std::invalid_argument("expand_symmetric: mean dimension mismatch");
  for (int i = 0; i < half; ++i) {
    if ((half_locations.col(i) - mean).norm() == 0.0) {
      throw std::invalid_argument("expand_symmetric: component on the mean reflects onto itself");
    }
    for (int j = i + 1; j < half; ++j) {
      if ((half_locations.col(i) - half_locations.col(j)).norm() == 0.0) {
        throw std::invalid_argument("expand_symmetric: coincident components");
      }
    }
  }

  DiracMixture dm;
  dm.locations.resize(n, 2 * half);
  dm.locations.leftCols(half) = half_locations;
  for (int i = 0; i < half; ++i) {
    dm.locations.col(half + i) = 2.0 * mean - half_locations.col(i);
  }
  dm.weights.resize(2 * half);
  if (half_weights) {
    if (half_weights->size() != half) {
      throw std::invalid_argument("expand_symmetric: weight count mismatch");
    }
    dm.weights.head(half) = *half_weights;
    dm.weights.tail(half) = *half_weights;
  } else {
    dm.weights.setConstant(0.5 / half);
  }
  return dm;
}

Eigen::MatrixXd JointLayout::locations(const Eigen::VectorXd& z) const {
  Eigen::MatrixXd x(dim, total_components);
  for (int f = 0; f < free_components; ++f) {
    x.col(f) = z.segment(static_cast<Eigen::Index>(f) * dim, dim);
  }
  if (symmetric) {
    for (int f = 0; f < free_components; ++f) {
      x.col(free_components + f) = 2.0 * mean - x.col(f);
    }
  }
  return x;
}

Eigen::VectorXd JointLayout::diameters(const Eigen::VectorXd& z) const {
  Eigen::VectorXd d(total_components);
  const int base = location_vars();
  for (int i = 0; i < total_components; ++i) {
    d[i] = std::exp(z[base + component_block(i)]);
  }
  return d;
}

JointLayout make_joint_layout(const DmaProblem& problem) {
  problem.validate();
  JointLayout layout;
  layout.dim = problem.dim;
  layout.total_components = problem.component_count;
  layout.symmetric = problem.symmetric;
  layout.free_components = problem.symmetric ? problem.component_count / 2 : problem.component_count;
  layout.mean = problem.symmetric ? *problem.prescribed_mean : Eigen::VectorXd::Zero(problem.dim);
  layout.weights = problem.component_weights();
  return layout;
}

ScalarFn joint_entropy_objective(const JointLayout& layout) {
  const double c_n = log_unit_ball_volume(layout.dim);
  double w_log_w = 0.0;
  Eigen::VectorXd tied_weight = Eigen::VectorXd::Zero(layout.free_components);
  for (int i = 0; i < layout.total_components; ++i) {
    const double w = layout.weights[i];
    w_log_w += w * std::log(w);
    tied_weight[layout.component_block(i)] += w;
  }
  const double n = layout.dim;
  return [layout, c_n, w_log_w, tied_weight, n](const Eigen::VectorXd& z, Eigen::VectorXd* grad) {
    const Eigen::VectorXd u = z.segment(layout.location_vars(), layout.free_components);
    if (grad != nullptr) {
      grad->setZero(layout.num_vars());
      grad->segment(layout.location_vars(), layout.free_components) = n * tied_weight;
    }
    return c_n - w_log_w + n * tied_weight.dot(u);
  };
}

VectorFn joint_moment_equality(const JointLayout& layout, const MomentTable& target) {
  std::vector<MultiIndex> keys;
  std::vector<double> target_values;
  for (const auto& [kappa, v] : target.entries()) {
    keys.push_back(kappa);
    target_values.push_back(kappa.is_zero() ? 1.0 : v);
  }
  auto basis = std::make_shared<kernels::MomentBasis>(kernels::make_basis(layout.dim, std::move(keys)));
  Eigen::VectorXd t = Eigen::Map<const Eigen::VectorXd>(target_values.data(),
                                                        static_cast<Eigen::Index>(target_values.size()));
  return [layout, basis, t](const Eigen::VectorXd& z, Eigen::MatrixXd* jac) {
    const Eigen::MatrixXd x = layout.locations(z);
    Eigen::VectorXd vals;
    kernels::moment_values(x, layout.weights, *basis, layout.pair_offset(), vals);
    // the zero-index row compares the exact mass 1 against the target 1
    for (int r = 0; r < basis->rows(); ++r) {
      if (basis->indices[static_cast<std::size_t>(r)].is_zero()) vals[r] = 1.0;
    }
    if (jac != nullptr) {
      Eigen::MatrixXd full;
      kernels::moment_jacobian(x, layout.weights, *basis, full);
      jac->setZero(basis->rows(), layout.num_vars());
      for (int f = 0; f < layout.free_components; ++f) {
        jac->middleCols(static_cast<Eigen::Index>(f) * layout.dim, layout.dim) =
            full.middleCols(static_cast<Eigen::Index>(f) * layout.dim, layout.dim);
        if (layout.symmetric) {
          jac->middleCols(static_cast<Eigen::Index>(f) * layout.dim, layout.dim) -=
              full.middleCols(static_cast<Eigen::Index>(layout.free_components + f) * layout.dim,
                              layout.dim);
        }
      }
    }
    return Eigen::VectorXd(vals - t);
  };
}

VectorFn joint_collision_inequality(const JointLayout& layout, double eps_slack,
                                    std::optional<double> d_max) {
  const auto pairs = kernels::all_pairs(layout.total_components);
  const double shrink = 1.0 - eps_slack;
  const double log_cap = d_max ? std::log(*d_max) : 0.0;
  const bool capped = d_max.has_value();
  return [layout, pairs, shrink, capped, log_cap](const Eigen::VectorXd& z, Eigen::MatrixXd* jac) {
    const Eigen::MatrixXd x = layout.locations(z);
    const Eigen::VectorXd d = layout.diameters(z);
    const auto n_pairs = static_cast<Eigen::Index>(pairs.size());
    const Eigen::Index rows = n_pairs + (capped ? layout.free_components : 0);

    Eigen::VectorXd g(rows);
    Eigen::VectorXd pair_vals;
    kernels::collision_values(x, d, shrink, pairs, pair_vals);
    g.head(n_pairs) = pair_vals;
    if (capped) {
      for (int f = 0; f < layout.free_components; ++f) {
        g[n_pairs + f] = z[layout.location_vars() + f] - log_cap;
      }
    }

    if (jac != nullptr) {
      jac->setZero(rows, layout.num_vars());
      const double shrink2 = shrink * shrink;
      for (Eigen::Index p = 0; p < n_pairs; ++p) {
        const auto [a, b] = pairs[static_cast<std::size_t>(p)];
        const Eigen::VectorXd delta = x.col(a) - x.col(b);
        const double s = d[a] + d[b];
        const double q = std::max(shrink2 * delta.squaredNorm(), 1e-24);
        const bool floored = shrink2 * delta.squaredNorm() < 1e-24;
        const int fa = layout.component_block(a);
        const int fb = layout.component_block(b);
        const double loc_coeff = floored ? 0.0 : 2.0 * shrink2 * s * s / (q * q);
        jac->row(p).segment(static_cast<Eigen::Index>(fa) * layout.dim, layout.dim) -=
            (loc_coeff * layout.component_sign(a)) * delta.transpose();
        jac->row(p).segment(static_cast<Eigen::Index>(fb) * layout.dim, layout.dim) +=
            (loc_coeff * layout.component_sign(b)) * delta.transpose();
        (*jac)(p, layout.location_vars() + fa) += 2.0 * s * d[a] / q;
        (*jac)(p, layout.location_vars() + fb) += 2.0 * s * d[b] / q;
      }
      if (capped) {
        for (int f = 0; f < layout.free_components; ++f) {
          (*jac)(n_pairs + f, layout.location_vars() + f) = 1.0;
        }
      }
    }
    return g;
  };
}

namespace {

// Moments restricted to the target's specified indices; the zero index is
// stored as exactly 1.
MomentTable moments_at(const Eigen::MatrixXd& locations, const Eigen::VectorXd& weights,
                       const MomentTable& target, int pair_offset) {
  std::vector<MultiIndex> keys;
  for (const auto& [kappa, v] : target.entries()) keys.push_back(kappa);
  const auto basis = kernels::make_basis(static_cast<int>(locations.rows()), std::move(keys));
  Eigen::VectorXd vals;
  kernels::moment_values(locations, weights, basis, pair_offset, vals);
  MomentTable table(target.dim(), target.order());
  for (int r = 0; r < basis.rows(); ++r) {
    const MultiIndex& kappa = basis.indices[static_cast<std::size_t>(r)];
    table.set(kappa, kappa.is_zero() ? 1.0 : vals[r]);
  }
  return table;
}

// Start values for the sphere sizes: half the nearest-neighbor distance,
// shrunk by the slack. Always feasible.
Eigen::VectorXd nn_half_diameters(const Eigen::MatrixXd& locations, int free_components,
                                  double shrink, const std::optional<double>& d_max) {
  Eigen::VectorXd d0(free_components);
  const int count = static_cast<int>(locations.cols());
  for (int f = 0; f < free_components; ++f) {
    double nearest = std::numeric_limits<double>::infinity();
    for (int j = 0; j < count; ++j) {
      if (j == f) continue;
      nearest = std::min(nearest, (locations.col(f) - locations.col(j)).norm());
    }
    d0[f] = shrink * 0.5 * nearest;
    if (d_max) d0[f] = std::min(d0[f], *d_max * (1.0 - 1e-9));
  }
  return d0;
}

// Fixed-location diameter optimization with tied halves for symmetric
// mixtures; same problem as max_entropy_diameters but over the free sizes.
Eigen::VectorXd tied_max_entropy_diameters(const JointLayout& layout,
                                           const Eigen::MatrixXd& locations,
                                           const SolverOptions& opts) {
  const int free = layout.free_components;
  const auto pairs = kernels::all_pairs(layout.total_components);
  const double shrink = 1.0 - opts.eps_slack;

  Eigen::VectorXd gaps(static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [a, b] = pairs[p];
    gaps[static_cast<Eigen::Index>(p)] = shrink * (locations.col(a) - locations.col(b)).norm();
    if (!(gaps[static_cast<Eigen::Index>(p)] > 0.0)) {
      throw std::invalid_argument("tied diameter fit: coincident locations");
    }
  }

  Eigen::VectorXd tied_weight = Eigen::VectorXd::Zero(free);
  for (int i = 0; i < layout.total_components; ++i) {
    tied_weight[layout.component_block(i)] += layout.weights[i];
  }
  const double n = layout.dim;
  ScalarFn objective = [tied_weight, n](const Eigen::VectorXd& u, Eigen::VectorXd* grad) {
    if (grad != nullptr) *grad = n * tied_weight;
    return n * tied_weight.dot(u);
  };

  const bool capped = opts.d_max.has_value();
  const double log_cap = capped ? std::log(*opts.d_max) : 0.0;
  VectorFn inequality = [&layout, &pairs, &gaps, free, capped,
                         log_cap](const Eigen::VectorXd& u, Eigen::MatrixXd* jac) {
    const Eigen::VectorXd d = u.array().exp();
    const auto n_pairs = static_cast<Eigen::Index>(pairs.size());
    const Eigen::Index rows = n_pairs + (capped ? free : 0);
    Eigen::VectorXd g(rows);
    if (jac != nullptr) jac->setZero(rows, free);
    for (Eigen::Index p = 0; p < n_pairs; ++p) {
      const auto [a, b] = pairs[static_cast<std::size_t>(p)];
      const int fa = layout.component_block(a);
      const int fb = layout.component_block(b);
      g[p] = (d[fa] + d[fb]) / gaps[p] - 1.0;
      if (jac != nullptr) {
        (*jac)(p, fa) += d[fa] / gaps[p];
        (*jac)(p, fb) += d[fb] / gaps[p];
      }
    }
    if (capped) {
      for (int f = 0; f < free; ++f) {
        g[n_pairs + f] = u[f] - log_cap;
        if (jac != nullptr) (*jac)(n_pairs + f, f) = 1.0;
      }
    }
    return g;
  };

  const Eigen::VectorXd d0 = nn_half_diameters(locations, free, shrink, opts.d_max);
  const Eigen::VectorXd u0 = d0.array().log();
  const SolveResult sol = maximize_constrained(objective, nullptr, inequality, u0, opts);

  Eigen::VectorXd d_free = sol.x.array().exp();
  double alpha = 1.0;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [a, b] = pairs[p];
    alpha = std::min(alpha, gaps[static_cast<Eigen::Index>(p)] /
                                (d_free[layout.component_block(a)] + d_free[layout.component_block(b)]));
  }
  d_free *= alpha * (1.0 - 1e-12);
  if (opts.d_max) d_free = d_free.cwiseMin(*opts.d_max);

  Eigen::VectorXd d(layout.total_components);
  for (int i = 0; i < layout.total_components; ++i) d[i] = d_free[layout.component_block(i)];
  return d;
}

// Sphere sizes for a finished location set. Falls back to zero sizes when the
// locations are degenerate.
struct DiameterFit {
  Eigen::VectorXd diameters;
  bool ok = false;
};

DiameterFit fit_diameters(const JointLayout& layout, const Eigen::MatrixXd& locations,
                          const SolverOptions& opts) {
  DiameterFit fit;
  try {
    if (layout.symmetric) {
      fit.diameters = tied_max_entropy_diameters(layout, locations, opts);
    } else {
      DiracMixture dm;
      dm.locations = locations;
      dm.weights = layout.weights;
      fit.diameters = max_entropy_diameters(dm, opts);
    }
    fit.ok = true;
  } catch (const std::exception&) {
    fit.diameters = Eigen::VectorXd::Zero(layout.total_components);
    fit.ok = false;
  }
  return fit;
}

// Initial free locations with a guard against coincident draws: the seed is
// incremented until the expanded mixture is non-degenerate (at most 100
// attempts).
struct DrawnStart {
  Eigen::VectorXd eta;
  Eigen::MatrixXd locations;
  std::uint64_t seed = 0;
};

DrawnStart draw_start(const JointLayout& layout, const DmaProblem& problem, std::uint64_t seed) {
  DrawnStart start;
  start.seed = seed;
  for (int attempt = 0; attempt < 100; ++attempt) {
    start.eta = init_random(start.seed, problem.component_count, problem.dim, problem.symmetric,
                            problem.prescribed_mean);
    Eigen::VectorXd z(layout.num_vars());
    z.setZero();
    z.head(layout.location_vars()) = start.eta;
    start.locations = layout.locations(z);
    double min_dist = std::numeric_limits<double>::infinity();
    for (int i = 0; i < layout.total_components; ++i) {
      for (int j = i + 1; j < layout.total_components; ++j) {
        min_dist = std::min(min_dist, (start.locations.col(i) - start.locations.col(j)).norm());
      }
    }
    if (layout.total_components == 1 || min_dist >= 1e-8) return start;
    start.seed += 1;
  }
  throw std::runtime_error("initialization kept drawing coincident locations");
}

SolutionReport finish_report(const DmaProblem& problem, const JointLayout& layout,
                             const Eigen::MatrixXd& locations, const DiameterFit& fit,
                             const SolverTrace& trace, std::uint64_t seed_used) {
  SolutionReport report;
  report.mixture.locations = locations;
  report.mixture.weights = layout.weights;
  report.diameters = fit.diameters;
  report.determinedness = classify(problem);
  report.trace = trace;
  report.seed_used = seed_used;

  const MomentTable actual = moments_at(locations, layout.weights, problem.target,
                                        layout.pair_offset());
  const MomentWeights* rw = problem.moment_weights ? &*problem.moment_weights : nullptr;
  report.residuals = residual(actual, problem.target, rw);
  report.moment_residual_norm = report.residuals.norm;

  report.feasible = fit.ok && check_feasible(locations, fit.diameters, problem.options.eps_slack).feasible;
  if (report.feasible) {
    report.entropy = entropy(PwcDensity{report.mixture, report.diameters});
  } else {
    report.entropy = -std::numeric_limits<double>::infinity();
  }
  return report;
}

double residual_inf(const SolutionReport& report) {
  return report.residuals.values.size() > 0 ? report.residuals.values.lpNorm<Eigen::Infinity>()
                                            : 0.0;
}

}  // namespace

SolutionReport solve_max_entropy(const DmaProblem& problem) {
  problem.validate();
  if (classify(problem) != Determinedness::underdetermined) {
    throw std::invalid_argument("solve_max_entropy: problem is not underdetermined");
  }
  if (problem.component_count == 1 && !problem.options.d_max) {
    throw std::domain_error("solve_max_entropy: unbounded (single component, no d_max cap)");
  }

  const JointLayout layout = make_joint_layout(problem);
  const SolverOptions& opts = problem.options;
  const ScalarFn objective = joint_entropy_objective(layout);
  const VectorFn equality = joint_moment_equality(layout, problem.target);
  const VectorFn inequality = joint_collision_inequality(layout, opts.eps_slack, opts.d_max);
  const double shrink = 1.0 - opts.eps_slack;

  std::optional<SolutionReport> best;
  bool best_ok = false;
  for (int r = 0; r < opts.restarts; ++r) {
    const DrawnStart start = draw_start(layout, problem, derive_stream_seed(opts.seed, r));
    const Eigen::VectorXd d0 =
        nn_half_diameters(start.locations, layout.free_components, shrink, opts.d_max);

    Eigen::VectorXd z0(layout.num_vars());
    z0.head(layout.location_vars()) = start.eta;
    z0.tail(layout.free_components) = d0.array().log();

    const SolveResult sol = maximize_constrained(objective, equality, inequality, z0, opts);
    const Eigen::MatrixXd locations = layout.locations(sol.x);
    const DiameterFit fit = fit_diameters(layout, locations, opts);
    SolutionReport report = finish_report(problem, layout, locations, fit, sol.trace, start.seed);
    report.converged = sol.trace.converged && report.feasible && residual_inf(report) <= opts.tol_eq;

    const bool better = !best ||
                        (report.converged && !best_ok) ||
                        (report.converged && best_ok && report.entropy > best->entropy) ||
                        (!report.converged && !best_ok && residual_inf(report) < residual_inf(*best));
    if (better) {
      best = std::move(report);
      best_ok = best->converged;
    }
  }

  if (!best->converged && residual_inf(*best) > 100.0 * opts.tol_eq) {
    best->trace.message += "; moment targets may need a larger component count";
  }
  return *best;
}

SolutionReport solve_lm_baseline(const DmaProblem& problem) {
  problem.validate();
  const JointLayout layout = make_joint_layout(problem);
  const SolverOptions& opts = problem.options;
  const VectorFn equality = joint_moment_equality(layout, problem.target);

  // same residuals, but over the location variables only
  VectorFn residual_fn = [&layout, &equality](const Eigen::VectorXd& eta, Eigen::MatrixXd* jac) {
    Eigen::VectorXd z(layout.num_vars());
    z.setZero();
    z.head(layout.location_vars()) = eta;
    Eigen::MatrixXd full;
    const Eigen::VectorXd r = equality(z, jac != nullptr ? &full : nullptr);
    if (jac != nullptr) *jac = full.leftCols(layout.location_vars());
    return r;
  };

  const DrawnStart start = draw_start(layout, problem, opts.seed);
  const SolveResult sol = lm_root(residual_fn, start.eta, opts);

  Eigen::VectorXd z(layout.num_vars());
  z.setZero();
  z.head(layout.location_vars()) = sol.x;
  const Eigen::MatrixXd locations = layout.locations(z);
  const DiameterFit fit = fit_diameters(layout, locations, opts);
  SolutionReport report = finish_report(problem, layout, locations, fit, sol.trace, start.seed);
  report.converged = residual_inf(report) <= opts.tol_eq && report.feasible;
  return report;
}

namespace {

SolutionReport solve_least_squares_like(const DmaProblem& problem, bool require_root) {
  const JointLayout layout = make_joint_layout(problem);
  const SolverOptions& opts = problem.options;

  std::vector<MultiIndex> keys;
  std::vector<double> targets;
  std::vector<double> row_weights;
  for (const auto& [kappa, v] : problem.target.entries()) {
    keys.push_back(kappa);
    targets.push_back(kappa.is_zero() ? 1.0 : v);
    double w = 1.0;
    if (problem.moment_weights) {
      auto it = problem.moment_weights->find(kappa);
      if (it != problem.moment_weights->end()) w = it->second;
    }
    row_weights.push_back(require_root ? 1.0 : w);
  }
  auto basis = std::make_shared<kernels::MomentBasis>(
      kernels::make_basis(layout.dim, std::move(keys)));
  const Eigen::VectorXd t =
      Eigen::Map<const Eigen::VectorXd>(targets.data(), static_cast<Eigen::Index>(targets.size()));
  const Eigen::VectorXd rw = Eigen::Map<const Eigen::VectorXd>(
      row_weights.data(), static_cast<Eigen::Index>(row_weights.size()));

  VectorFn residual_fn = [&layout, basis, t, rw](const Eigen::VectorXd& eta, Eigen::MatrixXd* jac) {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(layout.num_vars());
    z.head(layout.location_vars()) = eta;
    const Eigen::MatrixXd x = layout.locations(z);
    Eigen::VectorXd vals;
    kernels::moment_values(x, layout.weights, *basis, layout.pair_offset(), vals);
    for (int r = 0; r < basis->rows(); ++r) {
      if (basis->indices[static_cast<std::size_t>(r)].is_zero()) vals[r] = 1.0;
    }
    if (jac != nullptr) {
      Eigen::MatrixXd full;
      kernels::moment_jacobian(x, layout.weights, *basis, full);
      jac->resize(basis->rows(), layout.location_vars());
      for (int f = 0; f < layout.free_components; ++f) {
        jac->middleCols(static_cast<Eigen::Index>(f) * layout.dim, layout.dim) =
            full.middleCols(static_cast<Eigen::Index>(f) * layout.dim, layout.dim);
        if (layout.symmetric) {
          jac->middleCols(static_cast<Eigen::Index>(f) * layout.dim, layout.dim) -=
              full.middleCols(static_cast<Eigen::Index>(layout.free_components + f) * layout.dim,
                              layout.dim);
        }
      }
      jac->array().colwise() *= rw.array();
    }
    return Eigen::VectorXd(rw.cwiseProduct(vals - t));
  };

  struct Candidate {
    SolveResult sol;
    std::uint64_t seed = 0;
    double cost = std::numeric_limits<double>::infinity();
    bool root = false;
  };
  std::optional<Candidate> best;

  for (int r = 0; r < opts.restarts; ++r) {
    const DrawnStart start = draw_start(layout, problem, derive_stream_seed(opts.seed, r));
    Candidate cand;
    cand.sol = lm_root(residual_fn, start.eta, opts);
    cand.seed = start.seed;
    const Eigen::VectorXd res = residual_fn(cand.sol.x, nullptr);
    cand.cost = res.norm();
    cand.root = res.lpNorm<Eigen::Infinity>() <= opts.tol_eq;

    if (require_root && cand.root) {
      best = std::move(cand);
      break;  // first converged root in seed order
    }
    if (!best || cand.cost < best->cost) best = std::move(cand);
  }

  Eigen::VectorXd z = Eigen::VectorXd::Zero(layout.num_vars());
  z.head(layout.location_vars()) = best->sol.x;
  const Eigen::MatrixXd locations = layout.locations(z);
  const DiameterFit fit = fit_diameters(layout, locations, opts);
  SolutionReport report =
      finish_report(problem, layout, locations, fit, best->sol.trace, best->seed);
  if (require_root) {
    report.converged = best->root && report.feasible;
    if (!best->root) {
      report.trace.message +=
          "; no root across restarts (the targets may not be realizable by any mixture)";
    }
  } else {
    report.converged = best->sol.trace.converged;
  }
  return report;
}

}  // namespace

SolutionReport solve_overdetermined(const DmaProblem& problem) {
  problem.validate();
  if (classify(problem) != Determinedness::overdetermined) {
    throw std::invalid_argument("solve_overdetermined: problem is not overdetermined");
  }
  return solve_least_squares_like(problem, /*require_root=*/false);
}

SolutionReport solve_fully_determined(const DmaProblem& problem) {
  problem.validate();
  if (classify(problem) != Determinedness::fully_determined) {
    throw std::invalid_argument("solve_fully_determined: problem is not fully determined");
  }
  return solve_least_squares_like(problem, /*require_root=*/true);
}

SolutionReport solve_auto(const DmaProblem& problem) {
  switch (classify(problem)) {
    case Determinedness::underdetermined: return solve_max_entropy(problem);
    case Determinedness::fully_determined: return solve_fully_determined(problem);
    case Determinedness::overdetermined: return solve_overdetermined(problem);
  }
  throw std::logic_error("solve_auto: unreachable");
}

}  // namespace dmx
