#include "dmx/solver.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace dmx {

void SolverOptions::validate() const {
  if (!(tol_eq > 0.0) || !(tol_obj > 0.0)) {
    throw std::invalid_argument("SolverOptions: tolerances must be positive");
  }
  if (!(penalty_growth > 1.0)) {
    throw std::invalid_argument("SolverOptions: penalty_growth must exceed 1");
  }
  if (!(eps_slack >= 0.0 && eps_slack < 1.0)) {
    throw std::invalid_argument("SolverOptions: eps_slack must lie in [0, 1)");
  }
  if (max_outer < 1 || max_inner < 1 || restarts < 1) {
    throw std::invalid_argument("SolverOptions: iteration counts must be >= 1");
  }
}

namespace {

constexpr double kArmijoC = 1e-4;
constexpr double kArmijoShrink = 0.5;

struct Merit {
  const ScalarFn& objective;
  const VectorFn& equality;
  const VectorFn& inequality;
  Eigen::VectorXd lambda_eq;
  Eigen::VectorXd lambda_in;  // kept >= 0
  double mu = 10.0;

  // Augmented Lagrangian of the minimization form (objective negated).
  // Inequalities use the squared-hinge term with multipliers, so active
  // constraints reach feasibility without driving mu towards the cap.
  double value(const Eigen::VectorXd& x, Eigen::VectorXd* grad) const {
    Eigen::VectorXd fgrad;
    const double f = objective(x, grad != nullptr ? &fgrad : nullptr);
    double phi = -f;
    if (grad != nullptr) *grad = -fgrad;

    if (equality) {
      Eigen::MatrixXd jac;
      const Eigen::VectorXd c = equality(x, grad != nullptr ? &jac : nullptr);
      phi += lambda_eq.dot(c) + 0.5 * mu * c.squaredNorm();
      if (grad != nullptr) *grad += jac.transpose() * (lambda_eq + mu * c);
    }
    if (inequality) {
      Eigen::MatrixXd jac;
      const Eigen::VectorXd g = inequality(x, grad != nullptr ? &jac : nullptr);
      const Eigen::VectorXd active = (lambda_in + mu * g).cwiseMax(0.0);
      phi += (active.squaredNorm() - lambda_in.squaredNorm()) / (2.0 * mu);
      if (grad != nullptr) *grad += jac.transpose() * active;
    }
    return phi;
  }
};

// BFGS with Armijo backtracking on the merit function. Returns the final
// inf-norm of the merit gradient; `iters` accumulates inner iterations.
// Exits early when several consecutive steps no longer change the merit.
double bfgs_minimize(const Merit& merit, Eigen::VectorXd& x, double grad_tol, int max_iter,
                     int& iters) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd grad;
  double phi = merit.value(x, &grad);
  if (!std::isfinite(phi)) return std::numeric_limits<double>::infinity();

  int stalled = 0;
  for (int it = 0; it < max_iter; ++it) {
    const double gnorm = grad.lpNorm<Eigen::Infinity>();
    if (gnorm <= grad_tol) return gnorm;
    ++iters;

    Eigen::VectorXd dir = -(h_inv * grad);
    double slope = grad.dot(dir);
    if (!(slope < 0.0)) {
      h_inv.setIdentity();
      dir = -grad;
      slope = grad.dot(dir);
    }

    double step = 1.0;
    double phi_new = std::numeric_limits<double>::infinity();
    Eigen::VectorXd x_new;
    bool accepted = false;
    while (step > 1e-18) {
      x_new = x + step * dir;
      phi_new = merit.value(x_new, nullptr);
      if (std::isfinite(phi_new) && phi_new <= phi + kArmijoC * step * slope) {
        accepted = true;
        break;
      }
      step *= kArmijoShrink;
    }
    if (!accepted) return grad.lpNorm<Eigen::Infinity>();

    Eigen::VectorXd grad_new;
    phi_new = merit.value(x_new, &grad_new);
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = grad_new - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::VectorXd hy = h_inv * y;
      const double yhy = y.dot(hy);
      // inverse BFGS update
      h_inv += ((sy + yhy) * rho * rho) * (s * s.transpose());
      h_inv -= rho * (hy * s.transpose() + s * hy.transpose());
    }
    if (std::abs(phi - phi_new) <= 1e-16 * (1.0 + std::abs(phi))) {
      if (++stalled >= 25) {
        x = x_new;
        grad = grad_new;
        break;
      }
    } else {
      stalled = 0;
    }
    x = x_new;
    grad = grad_new;
    phi = phi_new;
  }
  return grad.lpNorm<Eigen::Infinity>();
}

}  // namespace

SolveResult maximize_constrained(const ScalarFn& objective, const VectorFn& equality,
                                 const VectorFn& inequality, const Eigen::VectorXd& x0,
                                 const SolverOptions& opts) {
  opts.validate();
  if (x0.size() == 0) throw std::invalid_argument("maximize_constrained: empty start point");
  if (!objective) throw std::invalid_argument("maximize_constrained: objective is required");
  {
    const double f0 = objective(x0, nullptr);
    if (!std::isfinite(f0)) {
      throw std::invalid_argument("maximize_constrained: objective not finite at x0");
    }
  }

  const int n_eq = equality ? static_cast<int>(equality(x0, nullptr).size()) : 0;
  const int n_in = inequality ? static_cast<int>(inequality(x0, nullptr).size()) : 0;

  Merit merit{objective,
              equality,
              inequality,
              Eigen::VectorXd::Zero(n_eq),
              Eigen::VectorXd::Zero(n_in),
              opts.penalty_init};
  SolveResult res;
  res.x = x0;
  SolverTrace& trace = res.trace;

  // Multiplier updates and penalty growth are mutually exclusive: multipliers
  // are refreshed while the violation keeps shrinking, the penalty grows only
  // on a genuine stall. Mixing the two lets the first-order update overshoot
  // once mu is large.
  double feas_target = std::max(opts.tol_eq, std::pow(merit.mu, -0.1));
  double inner_tol = std::max(opts.tol_obj, 1.0 / merit.mu);
  double prev_viol = std::numeric_limits<double>::infinity();

  for (int outer = 0; outer < opts.max_outer; ++outer) {
    trace.outer_iterations = outer + 1;
    const double gnorm =
        bfgs_minimize(merit, res.x, inner_tol, opts.max_inner, trace.inner_iterations);

    Eigen::VectorXd c, g;
    double veq = 0.0;
    double vineq = 0.0;
    double comp = 0.0;  // complementarity residual |min(-g, lambda)|
    if (equality) {
      c = equality(res.x, nullptr);
      veq = c.size() > 0 ? c.cwiseAbs().maxCoeff() : 0.0;
    }
    if (inequality) {
      g = inequality(res.x, nullptr);
      vineq = g.size() > 0 ? g.cwiseMax(0.0).maxCoeff() : 0.0;
      for (Eigen::Index p = 0; p < g.size(); ++p) {
        comp = std::max(comp, std::abs(std::min(-g[p], merit.lambda_in[p])));
      }
    }
    trace.max_equality_violation = veq;
    trace.max_inequality_violation = vineq;

    // overestimated multipliers park the merit minimum strictly inside the
    // feasible set, so complementarity has to enter the progress measure
    const double viol = std::max(veq, comp);
#ifdef DMX_SOLVER_DEBUG
    std::fprintf(stderr, "outer %2d  mu %.1e  veq %.2e  vineq %.2e  gnorm %.2e  inner %d\n",
                 outer, merit.mu, veq, vineq, gnorm, trace.inner_iterations);
#endif
    if (viol <= opts.tol_eq && gnorm <= opts.tol_obj) {
      trace.converged = true;
      trace.message = "converged";
      break;
    }
    if (viol <= opts.tol_eq) {
      // Feasible but not yet stationary: a large mu is what keeps the inner
      // solver from polishing, so relax it. Multipliers are still refined
      // while the residual is meaningfully above the floating-point noise of
      // the constraint evaluation; below that the update would only inject
      // mu-amplified noise.
      merit.mu = std::max(opts.penalty_init, merit.mu / opts.penalty_growth);
      inner_tol = opts.tol_obj;
      if (viol > 1e-10) {
        if (equality) merit.lambda_eq += merit.mu * c;
        if (inequality) merit.lambda_in = (merit.lambda_in + merit.mu * g).cwiseMax(0.0);
      }
    } else if (viol <= feas_target || viol <= 0.7 * prev_viol) {
      // First-order multiplier update, capped elementwise: near-degenerate
      // constraints at large mu would otherwise take steps that overshoot by
      // orders of magnitude.
      if (equality) {
        const Eigen::VectorXd cap = 100.0 * (merit.lambda_eq.cwiseAbs().array() + 1.0);
        merit.lambda_eq += (merit.mu * c).cwiseMin(cap).cwiseMax(-cap);
      }
      if (inequality) {
        const Eigen::VectorXd cap = 100.0 * (merit.lambda_in.array() + 1.0);
        merit.lambda_in =
            (merit.lambda_in + (merit.mu * g).cwiseMin(cap).cwiseMax(-cap)).cwiseMax(0.0);
      }
      feas_target = std::max(opts.tol_eq, 0.3 * std::min(feas_target, viol));
      inner_tol = std::max(opts.tol_obj, 0.1 * inner_tol);
    } else {
      merit.mu = std::min(merit.mu * opts.penalty_growth, opts.penalty_cap);
      feas_target = std::max(opts.tol_eq, std::pow(merit.mu, -0.1));
      inner_tol = std::max(opts.tol_obj, 1.0 / merit.mu);
    }
    prev_viol = viol;
  }
  if (!trace.converged) trace.message = "stopped at iteration limit without meeting tolerances";
  trace.final_objective = objective(res.x, nullptr);
  return res;
}

SolveResult lm_root(const VectorFn& residual, const Eigen::VectorXd& x0,
                    const SolverOptions& opts) {
  opts.validate();
  if (!residual) throw std::invalid_argument("lm_root: residual callback is required");
  if (x0.size() == 0) throw std::invalid_argument("lm_root: empty start point");

  SolveResult res;
  res.x = x0;
  SolverTrace& trace = res.trace;

  Eigen::MatrixXd jac;
  Eigen::VectorXd r = residual(res.x, &jac);
  if (!r.allFinite()) throw std::invalid_argument("lm_root: residual not finite at x0");

  Eigen::MatrixXd jtj = jac.transpose() * jac;
  Eigen::VectorXd g = jac.transpose() * r;
  double cost = 0.5 * r.squaredNorm();
  double lambda = 1e-3 * std::max(jtj.diagonal().maxCoeff(), 1e-12);

  const int max_iter = opts.max_inner;
  for (int it = 0; it < max_iter; ++it) {
    trace.outer_iterations = it;
    if (r.lpNorm<Eigen::Infinity>() <= opts.tol_eq) {
      trace.converged = true;
      trace.message = "root found";
      break;
    }
    if (g.lpNorm<Eigen::Infinity>() <= opts.tol_obj * std::max(1.0, std::sqrt(2.0 * cost))) {
      trace.converged = true;
      trace.message = "stationary point of the squared residual";
      break;
    }

    Eigen::MatrixXd damped = jtj;
    damped.diagonal().array() += lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(damped);
    if (llt.info() != Eigen::Success) {
      if (lambda > 1e10 * std::max(1.0, jtj.diagonal().maxCoeff())) {
        trace.message = "jacobian rank collapse";
        break;
      }
      lambda *= 10.0;
      continue;
    }
    const Eigen::VectorXd delta = llt.solve(-g);
    if (delta.norm() <= 1e-14 * (1.0 + res.x.norm())) {
      trace.converged = true;
      trace.message = "step size underflow at stationary point";
      break;
    }

    const Eigen::VectorXd x_new = res.x + delta;
    Eigen::MatrixXd jac_new;
    const Eigen::VectorXd r_new = residual(x_new, &jac_new);
    const double cost_new = r_new.allFinite() ? 0.5 * r_new.squaredNorm()
                                              : std::numeric_limits<double>::infinity();
    const double predicted = 0.5 * delta.dot(lambda * delta - g);
    const double rho = predicted > 0.0 ? (cost - cost_new) / predicted : -1.0;

    ++trace.inner_iterations;
    if (rho > 0.0 && std::isfinite(cost_new)) {
      res.x = x_new;
      r = r_new;
      jac = jac_new;
      jtj = jac.transpose() * jac;
      g = jac.transpose() * r;
      cost = cost_new;
      if (rho > 0.75) {
        lambda = std::max(lambda / 3.0, 1e-14);
      } else if (rho < 0.25) {
        lambda = std::min(lambda * 2.0, 1e14);
      }
    } else {
      lambda = std::min(lambda * 4.0, 1e14);
      if (lambda >= 1e14) {
        trace.message = "damping saturated without progress";
        break;
      }
    }
  }

  trace.max_equality_violation = r.lpNorm<Eigen::Infinity>();
  trace.final_objective = -cost;
  if (trace.message.empty()) {
    trace.message = trace.converged ? "converged" : "iteration limit reached";
  }
  return res;
}

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("fd_gradient: step must be positive");
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (int i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    xp[i] = xi + step;
    const double fp = f(xp);
    xp[i] = xi - step;
    const double fm = f(xp);
    xp[i] = xi;
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("fd_jacobian: step must be positive");
  Eigen::VectorXd xp = x;
  Eigen::MatrixXd jac;
  for (int i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    xp[i] = xi + step;
    const Eigen::VectorXd fp = f(xp);
    xp[i] = xi - step;
    const Eigen::VectorXd fm = f(xp);
    xp[i] = xi;
    if (jac.size() == 0) jac.resize(fp.size(), x.size());
    jac.col(i) = (fp - fm) / (2.0 * step);
  }
  return jac;
}

}  // namespace dmx
