#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dmx/problem.hpp"
#include "dmx/rng.hpp"
#include "oracles.hpp"

using dmx::Determinedness;
using dmx::DmaProblem;
using dmx::MomentTable;
using dmx::MultiIndex;

namespace {

MomentTable scalar_targets(std::vector<std::pair<int, double>> entries, int order) {
  MomentTable t(1, order);
  for (const auto& [i, v] : entries) t.set(MultiIndex({i}), v);
  return t;
}

DmaProblem standard_normal_problem(int count) {
  DmaProblem p(1, count, scalar_targets({{1, 0.0}, {2, 1.0}}, 2));
  return p;
}

std::vector<double> sorted_scalar_locations(const dmx::SolutionReport& rep) {
  std::vector<double> locs(rep.mixture.locations.data(),
                           rep.mixture.locations.data() + rep.mixture.count());
  std::sort(locs.begin(), locs.end());
  return locs;
}

}  // namespace

TEST_CASE("classify compares parameters against specified targets") {
  CHECK(dmx::classify(standard_normal_problem(6)) == Determinedness::underdetermined);

  {
    MomentTable t(2, 2);
    t.set(MultiIndex({0, 0}), 1.0);
    t.set(MultiIndex({0, 1}), 0.0);
    t.set(MultiIndex({1, 0}), 0.0);
    t.set(MultiIndex({1, 1}), 0.0);
    t.set(MultiIndex({2, 0}), 1.0);
    t.set(MultiIndex({0, 2}), 1.0);
    DmaProblem p(2, 3, std::move(t));
    CHECK(dmx::classify(p) == Determinedness::fully_determined);
  }
  {
    DmaProblem p(1, 2, scalar_targets({{1, 0.0}, {2, 1.0}, {3, 0.0}, {4, 3.0}, {5, 0.0}}, 5));
    CHECK(dmx::classify(p) == Determinedness::overdetermined);
  }
}

TEST_CASE("init_random is deterministic per seed") {
  const auto a = dmx::init_random(42, 6, 2, false, {});
  const auto b = dmx::init_random(42, 6, 2, false, {});
  const auto c = dmx::init_random(43, 6, 2, false, {});
  REQUIRE(a.size() == 12);
  CHECK((a.array() == b.array()).all());
  CHECK((a.array() != c.array()).any());

  const auto halves = dmx::init_random(7, 4, 3, true, Eigen::VectorXd::Zero(3));
  CHECK(halves.size() == 6);  // two free components in three dimensions
}

TEST_CASE("expand_symmetric reflects through the mean") {
  SUBCASE("single free component") {
    Eigen::MatrixXd half(2, 1);
    half << 1.0, 0.0;
    const auto dm = dmx::expand_symmetric(half, Eigen::Vector2d(0.0, 0.0));
    REQUIRE(dm.count() == 2);
    CHECK(dm.locations(0, 1) == -1.0);
    CHECK(dm.locations(1, 1) == 0.0);
    CHECK(dm.weights[0] == 0.5);
  }
  SUBCASE("two free components, stated reflections") {
    Eigen::MatrixXd half(2, 2);
    half << 1.0, 3.0, 2.0, -1.0;
    const auto dm = dmx::expand_symmetric(half, Eigen::Vector2d(0.0, 0.0));
    REQUIRE(dm.count() == 4);
    CHECK(dm.locations.col(2) == -half.col(0));
    CHECK(dm.locations.col(3) == -half.col(1));
  }
  SUBCASE("mean is reproduced to machine precision") {
    dmx::Rng rng(9);
    for (int trial = 0; trial < 30; ++trial) {
      const int dim = 1 + static_cast<int>(rng.next_u64() % 3);
      const int half_count = 1 + static_cast<int>(rng.next_u64() % 4);
      Eigen::MatrixXd half(dim, half_count);
      for (int i = 0; i < half_count; ++i) {
        for (int k = 0; k < dim; ++k) half(k, i) = 2.0 * rng.next_normal();
      }
      Eigen::VectorXd mean(dim);
      for (int k = 0; k < dim; ++k) mean[k] = rng.next_normal();
      const auto dm = dmx::expand_symmetric(half, mean);
      const Eigen::VectorXd got = dm.locations * dm.weights;
      CHECK((got - mean).lpNorm<Eigen::Infinity>() <= 1e-14 * (1.0 + mean.lpNorm<Eigen::Infinity>()));
    }
  }
  SUBCASE("degenerate inputs are rejected") {
    Eigen::MatrixXd on_mean(1, 1);
    on_mean << 0.5;
    CHECK_THROWS_AS(dmx::expand_symmetric(on_mean, Eigen::VectorXd::Constant(1, 0.5)),
                    std::invalid_argument);
    Eigen::MatrixXd coincident(1, 2);
    coincident << 1.0, 1.0;
    CHECK_THROWS_AS(dmx::expand_symmetric(coincident, Eigen::VectorXd::Zero(1)),
                    std::invalid_argument);
  }
}

TEST_CASE("joint assembly callbacks match finite differences") {
  dmx::Rng rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    const bool symmetric = trial % 2 == 1;
    const int dim = 1 + static_cast<int>(rng.next_u64() % 2);
    const int count = symmetric ? 4 : 2 + static_cast<int>(rng.next_u64() % 3);

    MomentTable t(dim, 2);
    for (const auto& kappa : dmx::enumerate_indices(dim, 2)) {
      t.set(kappa, kappa.is_zero() ? 1.0 : rng.next_normal());
    }
    DmaProblem prob(dim, count, std::move(t));
    prob.symmetric = symmetric;
    if (symmetric) prob.prescribed_mean = Eigen::VectorXd::Zero(dim);

    const auto layout = dmx::make_joint_layout(prob);
    const auto objective = dmx::joint_entropy_objective(layout);
    const auto equality = dmx::joint_moment_equality(layout, prob.target);
    const auto inequality = dmx::joint_collision_inequality(layout, 1e-3, std::nullopt);

    Eigen::VectorXd z(layout.num_vars());
    for (int i = 0; i < z.size(); ++i) z[i] = rng.next_normal();
    z.tail(layout.free_components) =
        z.tail(layout.free_components).array().abs() * 0.2 - 1.5;

    Eigen::VectorXd grad;
    objective(z, &grad);
    const Eigen::VectorXd fd_obj =
        dmx::fd_gradient([&](const Eigen::VectorXd& q) { return objective(q, nullptr); }, z, 1e-6);
    CHECK((grad - fd_obj).lpNorm<Eigen::Infinity>() <= 1e-5 * std::max(1.0, fd_obj.lpNorm<Eigen::Infinity>()));

    Eigen::MatrixXd jac_eq;
    equality(z, &jac_eq);
    const Eigen::MatrixXd fd_eq =
        dmx::fd_jacobian([&](const Eigen::VectorXd& q) { return equality(q, nullptr); }, z, 1e-6);
    CHECK((jac_eq - fd_eq).cwiseAbs().maxCoeff() <=
          1e-5 * std::max(1.0, fd_eq.cwiseAbs().maxCoeff()));

    Eigen::MatrixXd jac_in;
    inequality(z, &jac_in);
    const Eigen::MatrixXd fd_in =
        dmx::fd_jacobian([&](const Eigen::VectorXd& q) { return inequality(q, nullptr); }, z, 1e-6);
    CHECK((jac_in - fd_in).cwiseAbs().maxCoeff() <=
          1e-5 * std::max(1.0, fd_in.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("solve_max_entropy reproduces the standard normal targets") {
  auto prob = standard_normal_problem(6);
  prob.options.seed = 0;
  const auto rep = dmx::solve_max_entropy(prob);
  CHECK(rep.converged);
  CHECK(rep.feasible);
  CHECK(rep.determinedness == Determinedness::underdetermined);
  CHECK(rep.residuals.values.lpNorm<Eigen::Infinity>() <= 1e-6);
  CHECK(rep.mixture.min_pairwise_distance() > 0.05);

  // same seed twice is bitwise identical
  const auto rep2 = dmx::solve_max_entropy(prob);
  CHECK((rep.mixture.locations.array() == rep2.mixture.locations.array()).all());
  CHECK((rep.diameters.array() == rep2.diameters.array()).all());

  // the regularized solution dominates the plain root solve in entropy
  const auto lm = dmx::solve_lm_baseline(prob);
  CHECK(lm.converged);
  CHECK(rep.entropy > lm.entropy);
}

TEST_CASE("solve_max_entropy requires the underdetermined case") {
  DmaProblem square(1, 2, scalar_targets({{1, 0.0}, {2, 1.0}}, 2));
  CHECK_THROWS_AS(dmx::solve_max_entropy(square), std::invalid_argument);
}

TEST_CASE("solve_max_entropy on the two-dimensional symmetric problem") {
  MomentTable t(2, 2);
  t.set(MultiIndex({0, 0}), 1.0);
  t.set(MultiIndex({0, 1}), 0.0);
  t.set(MultiIndex({1, 0}), 0.0);
  t.set(MultiIndex({1, 1}), 0.0);
  t.set(MultiIndex({2, 0}), 1.0);
  t.set(MultiIndex({0, 2}), 3.0);
  DmaProblem prob(2, 16, std::move(t));
  prob.symmetric = true;
  prob.prescribed_mean = Eigen::Vector2d(0.0, 0.0);
  prob.options.seed = 1;

  const auto rep = dmx::solve_max_entropy(prob);
  CHECK(rep.converged);
  CHECK(rep.feasible);
  CHECK(rep.moment_residual_norm <= 1e-5);

  // odd moments vanish exactly through the mirrored parametrization
  for (Eigen::Index i = 0; i < rep.residuals.values.size(); ++i) {
    if (rep.residuals.indices[static_cast<std::size_t>(i)].order() % 2 == 1) {
      CHECK(rep.residuals.values[i] == 0.0);
    }
  }

  // sizes are tied between a component and its mirror
  for (int i = 0; i < 8; ++i) {
    CHECK(rep.diameters[i] == rep.diameters[i + 8]);
    CHECK(rep.mixture.locations.col(i + 8) == -rep.mixture.locations.col(i));
  }
}

TEST_CASE("solve_max_entropy handles a plain two-dimensional problem") {
  MomentTable t(2, 2);
  t.set(MultiIndex({1, 0}), 0.5);
  t.set(MultiIndex({0, 1}), -0.2);
  t.set(MultiIndex({2, 0}), 1.3);
  DmaProblem prob(2, 6, std::move(t));
  prob.options.seed = 2;
  const auto rep = dmx::solve_max_entropy(prob);
  CHECK(rep.converged);
  CHECK(rep.feasible);
  CHECK(rep.residuals.values.lpNorm<Eigen::Infinity>() <= 1e-6);
  CHECK(dmx::check_feasible(rep.mixture.locations, rep.diameters, prob.options.eps_slack).feasible);
}

TEST_CASE("solve_lm_baseline finds non-unique roots") {
  std::vector<std::vector<double>> roots;
  for (std::uint64_t seed : {0, 1, 2}) {
    auto prob = standard_normal_problem(6);
    prob.options.seed = seed;
    const auto rep = dmx::solve_lm_baseline(prob);
    CHECK(rep.converged);
    CHECK(rep.residuals.values.lpNorm<Eigen::Infinity>() <= 1e-6);
    roots.push_back(sorted_scalar_locations(rep));
  }
  auto dist = [](const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
  };
  CHECK(dist(roots[0], roots[1]) > 1e-3);
  CHECK(dist(roots[0], roots[2]) > 1e-3);
}

TEST_CASE("solve_fully_determined") {
  SUBCASE("symmetric pair") {
    DmaProblem prob(1, 2, scalar_targets({{1, 0.0}, {2, 1.0}}, 2));
    const auto rep = dmx::solve_fully_determined(prob);
    CHECK(rep.converged);
    const auto locs = sorted_scalar_locations(rep);
    CHECK(locs[0] == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(locs[1] == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("shifted pair") {
    DmaProblem prob(1, 2, scalar_targets({{1, 1.0}, {2, 2.0}}, 2));
    const auto rep = dmx::solve_fully_determined(prob);
    CHECK(rep.converged);
    const auto locs = sorted_scalar_locations(rep);
    CHECK(std::abs(locs[0]) <= 1e-5);
    CHECK(locs[1] == doctest::Approx(2.0).epsilon(1e-5));
  }
  SUBCASE("unrealizable targets fail with a diagnostic") {
    DmaProblem prob(1, 2, scalar_targets({{1, 1.0}, {2, 0.5}}, 2));
    const auto rep = dmx::solve_fully_determined(prob);
    CHECK(!rep.converged);
    CHECK(rep.moment_residual_norm > 1e-2);
    CHECK(rep.trace.message.find("root") != std::string::npos);
  }
}

TEST_CASE("solve_overdetermined") {
  SUBCASE("single point cannot satisfy both normal moments") {
    DmaProblem prob(1, 1, scalar_targets({{1, 0.0}, {2, 1.0}}, 2));
    prob.options.d_max = 10.0;
    const auto rep = dmx::solve_overdetermined(prob);
    CHECK(rep.converged);

    // independent scan of the squared residual over a 1-D grid
    const auto oracle = oracles::grid_minimize_1d(
        [](double x) { return x * x + (x * x - 1.0) * (x * x - 1.0); }, -3.0, 3.0, 1e-4);
    CHECK(rep.moment_residual_norm == doctest::Approx(std::sqrt(oracle.value)).epsilon(1e-6));
    CHECK(std::abs(rep.mixture.locations(0, 0)) ==
          doctest::Approx(std::abs(oracle.x)).epsilon(1e-4));
    CHECK(rep.moment_residual_norm == doctest::Approx(std::sqrt(0.75)).epsilon(1e-6));
  }
  SUBCASE("consistent targets are matched to high accuracy") {
    // moments generated from an actual two-point mixture
    Eigen::MatrixXd locs(1, 2);
    locs << -0.7, 1.9;
    const auto source = dmx::DiracMixture::equal_weights(locs);
    const auto table = dmx::dirac_moments(source, 5);
    MomentTable target(1, 5);
    for (int i = 1; i <= 5; ++i) {
      target.set(MultiIndex({i}), *table.get(MultiIndex({i})));
    }
    DmaProblem prob(1, 2, std::move(target));
    prob.options.tol_eq = 1e-9;
    const auto rep = dmx::solve_overdetermined(prob);
    CHECK(rep.converged);
    CHECK(rep.moment_residual_norm <= 1e-8);
  }
  SUBCASE("zero weight silences an index") {
    DmaProblem prob(1, 1, scalar_targets({{1, 0.5}, {2, 4.0}}, 2));
    prob.options.d_max = 10.0;
    dmx::MomentWeights w;
    w[MultiIndex({1})] = 1.0;
    w[MultiIndex({2})] = 0.0;
    prob.moment_weights = w;
    const auto rep = dmx::solve_overdetermined(prob);
    CHECK(rep.converged);
    CHECK(rep.mixture.locations(0, 0) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(rep.moment_residual_norm <= 1e-6);  // weighted norm ignores e2
  }
}

TEST_CASE("translation equivariance of the moment match") {
  const double shift = 1.7;
  auto base = standard_normal_problem(6);
  base.options.seed = 3;
  DmaProblem moved(1, 6, scalar_targets({{1, shift}, {2, 1.0 + shift * shift}}, 2));
  moved.options.seed = 3;

  const auto rep = dmx::solve_max_entropy(moved);
  CHECK(rep.converged);
  const auto moments = dmx::dirac_moments(rep.mixture, 2);
  CHECK(*moments.get(MultiIndex({1})) == doctest::Approx(shift).epsilon(1e-6));
  CHECK(*moments.get(MultiIndex({2})) == doctest::Approx(1.0 + shift * shift).epsilon(1e-6));
}

TEST_CASE("entropy dominance over the unregularized baseline") {
  double min_maxent = 1e300;
  double max_lm = -1e300;
  for (std::uint64_t seed : {0, 1, 2}) {
    auto prob = standard_normal_problem(6);
    prob.options.seed = seed;
    const auto me = dmx::solve_max_entropy(prob);
    const auto lm = dmx::solve_lm_baseline(prob);
    REQUIRE(me.converged);
    REQUIRE(lm.converged);
    min_maxent = std::min(min_maxent, me.entropy);
    max_lm = std::max(max_lm, lm.entropy);
  }
  CHECK(min_maxent >= max_lm);
}

TEST_CASE("DmaProblem validation") {
  auto p = standard_normal_problem(6);
  CHECK_NOTHROW(p.validate());

  p.symmetric = true;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);  // no mean
  p.prescribed_mean = Eigen::VectorXd::Zero(1);
  CHECK_NOTHROW(p.validate());
  p.component_count = 5;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);  // odd count

  auto q = standard_normal_problem(4);
  q.weights = Eigen::VectorXd::Constant(4, 0.3);
  CHECK_THROWS_AS(q.validate(), std::invalid_argument);  // weights sum to 1.2
}
