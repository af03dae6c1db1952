// Timing comparison between the serial reference kernels and the OpenMP
// variants. Also verifies that both produce bitwise identical output, which
// is the property the test suite relies on.

#include <chrono>
#include <cstdio>
#include <functional>

#include "dmx/kernels.hpp"
#include "dmx/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using Clock = std::chrono::steady_clock;

double time_best_of(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    fn();
    const auto t1 = Clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

void report(const char* name, double serial_s, double parallel_s, bool identical) {
  std::printf("%-16s serial %8.3f ms   parallel %8.3f ms   speedup %5.2fx   bitwise %s\n", name,
              serial_s * 1e3, parallel_s * 1e3, serial_s / parallel_s,
              identical ? "equal" : "DIFFERENT");
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; the parallel path falls back to serial\n");
#endif

  const int dim = 3;
  const int order = 6;
  const int count = 1200;
  dmx::Rng rng(42);

  Eigen::MatrixXd locations(dim, count);
  for (int i = 0; i < count; ++i) {
    for (int k = 0; k < dim; ++k) locations(k, i) = rng.next_normal();
  }
  const Eigen::VectorXd weights = Eigen::VectorXd::Constant(count, 1.0 / count);
  Eigen::VectorXd diameters(count);
  for (int i = 0; i < count; ++i) diameters[i] = 0.01 + 0.05 * rng.next_double();

  const auto basis = dmx::kernels::make_basis(dim, dmx::enumerate_indices(dim, order));
  const auto pairs = dmx::kernels::all_pairs(count);
  std::printf("instance: dim %d, order %d (%d indices), %d components, %zu pairs\n\n", dim, order,
              basis.rows(), count, pairs.size());

  const int reps = 5;
  {
    Eigen::VectorXd a, b;
    const double ts = time_best_of(
        reps, [&] { dmx::kernels::moment_values_serial(locations, weights, basis, 0, a); });
    const double tp = time_best_of(
        reps, [&] { dmx::kernels::moment_values_parallel(locations, weights, basis, 0, b); });
    report("moment values", ts, tp, (a.array() == b.array()).all());
  }
  {
    Eigen::MatrixXd a, b;
    const double ts = time_best_of(
        reps, [&] { dmx::kernels::moment_jacobian_serial(locations, weights, basis, a); });
    const double tp = time_best_of(
        reps, [&] { dmx::kernels::moment_jacobian_parallel(locations, weights, basis, b); });
    report("moment jacobian", ts, tp, (a.array() == b.array()).all());
  }
  {
    Eigen::VectorXd a, b;
    const double ts = time_best_of(reps, [&] {
      dmx::kernels::collision_values_serial(locations, diameters, 0.999, pairs, a);
    });
    const double tp = time_best_of(reps, [&] {
      dmx::kernels::collision_values_parallel(locations, diameters, 0.999, pairs, b);
    });
    report("collisions", ts, tp, (a.array() == b.array()).all());
  }
  return 0;
}
