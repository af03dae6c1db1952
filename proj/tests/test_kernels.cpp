#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dmx/kernels.hpp"
#include "dmx/rng.hpp"

namespace k = dmx::kernels;

namespace {

struct Instance {
  Eigen::MatrixXd locations;
  Eigen::VectorXd weights;
  Eigen::VectorXd diameters;
};

Instance random_instance(int dim, int count, std::uint64_t seed) {
  dmx::Rng rng(seed);
  Instance in;
  in.locations.resize(dim, count);
  for (int i = 0; i < count; ++i) {
    for (int j = 0; j < dim; ++j) in.locations(j, i) = 2.0 * rng.next_normal();
  }
  Eigen::VectorXd w(count);
  for (int i = 0; i < count; ++i) w[i] = 0.1 + rng.next_double();
  in.weights = w / w.sum();
  in.diameters.resize(count);
  for (int i = 0; i < count; ++i) in.diameters[i] = 0.05 + 0.5 * rng.next_double();
  return in;
}

}  // namespace

TEST_CASE("serial and parallel kernels agree bitwise") {
  for (std::uint64_t seed : {1, 2, 3}) {
    for (const auto& [dim, count] : std::vector<std::pair<int, int>>{{1, 7}, {2, 12}, {3, 30}}) {
      const auto in = random_instance(dim, count, seed);
      const auto basis = k::make_basis(dim, dmx::enumerate_indices(dim, 4));
      const auto pairs = k::all_pairs(count);

      Eigen::VectorXd va, vb;
      k::moment_values_serial(in.locations, in.weights, basis, 0, va);
      k::moment_values_parallel(in.locations, in.weights, basis, 0, vb);
      CHECK((va.array() == vb.array()).all());

      Eigen::MatrixXd ja, jb;
      k::moment_jacobian_serial(in.locations, in.weights, basis, ja);
      k::moment_jacobian_parallel(in.locations, in.weights, basis, jb);
      CHECK((ja.array() == jb.array()).all());

      Eigen::VectorXd ca, cb;
      k::collision_values_serial(in.locations, in.diameters, 0.999, pairs, ca);
      k::collision_values_parallel(in.locations, in.diameters, 0.999, pairs, cb);
      CHECK((ca.array() == cb.array()).all());
    }
  }
}

TEST_CASE("paired summation agrees across serial and parallel") {
  const int half = 6;
  const auto in = random_instance(2, half, 11);
  Eigen::MatrixXd full(2, 2 * half);
  full.leftCols(half) = in.locations;
  full.rightCols(half) = -in.locations;
  Eigen::VectorXd weights(2 * half);
  weights.head(half) = in.weights / 2.0;
  weights.tail(half) = in.weights / 2.0;

  const auto basis = k::make_basis(2, dmx::enumerate_indices(2, 3));
  Eigen::VectorXd va, vb;
  k::moment_values_serial(full, weights, basis, half, va);
  k::moment_values_parallel(full, weights, basis, half, vb);
  CHECK((va.array() == vb.array()).all());

  SUBCASE("odd rows vanish exactly for a point-symmetric mixture") {
    for (int r = 0; r < basis.rows(); ++r) {
      if (basis.indices[static_cast<std::size_t>(r)].order() % 2 == 1) {
        CHECK(va[r] == 0.0);
      }
    }
  }
  SUBCASE("pairing changes only the summation order") {
    Eigen::VectorXd plain;
    k::moment_values_serial(full, weights, basis, 0, plain);
    for (int r = 0; r < basis.rows(); ++r) {
      CHECK(va[r] == doctest::Approx(plain[r]).epsilon(1e-12));
    }
  }
}

TEST_CASE("kernel input validation") {
  const auto in = random_instance(2, 4, 5);
  const auto basis = k::make_basis(2, dmx::enumerate_indices(2, 2));
  Eigen::VectorXd out;
  CHECK_THROWS_AS(k::moment_values_serial(in.locations, in.weights, basis, 3, out),
                  std::invalid_argument);
  const auto wrong = k::make_basis(3, dmx::enumerate_indices(3, 2));
  CHECK_THROWS_AS(k::moment_values_serial(in.locations, in.weights, wrong, 0, out),
                  std::invalid_argument);
}

TEST_CASE("dispatch honors the runtime switch") {
  const bool before = k::parallel_enabled();
  const auto in = random_instance(2, 9, 21);
  const auto basis = k::make_basis(2, dmx::enumerate_indices(2, 3));

  Eigen::VectorXd with_parallel, with_serial;
  k::set_parallel(true);
  k::moment_values(in.locations, in.weights, basis, 0, with_parallel);
  k::set_parallel(false);
  CHECK(!k::parallel_enabled());
  k::moment_values(in.locations, in.weights, basis, 0, with_serial);
  CHECK((with_parallel.array() == with_serial.array()).all());
  k::set_parallel(before);
}
