#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace oracles {

GaussHermiteRule gauss_hermite(int n) {
  // Jacobi matrix of the physicists' Hermite polynomials: zero diagonal,
  // off-diagonal beta_k = sqrt(k/2).
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double beta = std::sqrt(0.5 * k);
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  GaussHermiteRule rule;
  rule.nodes = eig.eigenvalues();
  rule.weights.resize(n);
  const double mu0 = std::sqrt(M_PI);  // integral of exp(-t^2)
  for (int k = 0; k < n; ++k) {
    const double v = eig.eigenvectors()(0, k);
    rule.weights[k] = mu0 * v * v;
  }
  return rule;
}

double gh_gaussian_raw_moment(int i, double mean, double stddev, const GaussHermiteRule& rule) {
  // substitute x = mean + sqrt(2) sigma t
  double acc = 0.0;
  for (int k = 0; k < rule.nodes.size(); ++k) {
    const double x = mean + std::sqrt(2.0) * stddev * rule.nodes[k];
    double p = 1.0;
    for (int j = 0; j < i; ++j) p *= x;
    acc += rule.weights[k] * p;
  }
  return acc / std::sqrt(M_PI);
}

std::vector<std::vector<int>> brute_force_indices(int dim, int max_order) {
  std::vector<std::vector<int>> out;
  std::vector<int> tuple(static_cast<std::size_t>(dim), 0);
  while (true) {
    int total = 0;
    for (int e : tuple) total += e;
    if (total <= max_order) out.push_back(tuple);
    int k = dim - 1;
    while (k >= 0) {
      if (++tuple[static_cast<std::size_t>(k)] <= max_order) break;
      tuple[static_cast<std::size_t>(k)] = 0;
      --k;
    }
    if (k < 0) break;
  }
  std::sort(out.begin(), out.end(), [](const std::vector<int>& a, const std::vector<int>& b) {
    int sa = 0, sb = 0;
    for (int e : a) sa += e;
    for (int e : b) sb += e;
    if (sa != sb) return sa < sb;
    return a < b;
  });
  return out;
}

namespace {

double pwc_entropy(const Eigen::VectorXd& weights, const Eigen::VectorXd& d) {
  // one-dimensional: c_1 = log 2
  double acc = std::log(2.0);
  for (int i = 0; i < weights.size(); ++i) {
    acc += weights[i] * (std::log(d[i]) - std::log(weights[i]));
  }
  return acc;
}

}  // namespace

GridSearchResult grid_max_entropy_diameters(const Eigen::VectorXd& locations,
                                            const Eigen::VectorXd& weights, double eps_slack,
                                            double step) {
  const int count = static_cast<int>(locations.size());
  if (count != 2 && count != 3) {
    throw std::invalid_argument("grid oracle handles 2 or 3 components");
  }
  std::vector<int> order(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return locations[a] < locations[b]; });

  const double shrink = 1.0 - eps_slack;
  auto gap = [&](int a, int b) { return shrink * std::abs(locations[a] - locations[b]); };

  GridSearchResult best;
  best.entropy = -1e300;
  best.diameters = Eigen::VectorXd::Zero(count);

  if (count == 2) {
    const int a = order[0], b = order[1];
    const double cap = gap(a, b);
    auto sweep = [&](double lo, double hi, double h) {
      for (double da = std::max(lo, h); da <= hi + 1e-15; da += h) {
        const double db = cap - da;
        if (db <= 0.0) continue;
        Eigen::VectorXd d(2);
        d[a] = da;
        d[b] = db;
        const double e = pwc_entropy(weights, d);
        if (e > best.entropy) {
          best.entropy = e;
          best.diameters = d;
        }
      }
    };
    sweep(step, cap, step);
    for (double h = step / 10.0; h >= step / 1000.0 - 1e-18; h /= 10.0) {
      const double center = best.diameters[a];
      sweep(std::max(h, center - 20.0 * h * 10.0), center + 20.0 * h * 10.0, h);
    }
    return best;
  }

  const int a = order[0], b = order[1], c = order[2];
  const double cab = gap(a, b);
  const double cbc = gap(b, c);
  const double cac = gap(a, c);
  auto sweep = [&](double lo_a, double hi_a, double lo_b, double hi_b, double h) {
    for (double da = std::max(lo_a, h); da <= hi_a + 1e-15; da += h) {
      for (double db = std::max(lo_b, h); db <= hi_b + 1e-15; db += h) {
        if (da + db > cab) continue;
        // largest feasible size of the right-most component
        const double dc = std::min(cbc - db, cac - da);
        if (dc <= 0.0) continue;
        Eigen::VectorXd d(3);
        d[a] = da;
        d[b] = db;
        d[c] = dc;
        const double e = pwc_entropy(weights, d);
        if (e > best.entropy) {
          best.entropy = e;
          best.diameters = d;
        }
      }
    }
  };
  sweep(step, cab, step, cab, step);
  for (double h = step / 10.0; h >= step / 1000.0 - 1e-18; h /= 10.0) {
    const double ca = best.diameters[a];
    const double cb = best.diameters[b];
    const double w = 20.0 * h * 10.0;
    sweep(std::max(h, ca - w), ca + w, std::max(h, cb - w), cb + w, h);
  }
  return best;
}

McMoments mc_mixture_moments(const std::vector<double>& weights, const std::vector<double>& means,
                             const std::vector<double>& stddevs, int order, long samples,
                             std::uint64_t seed) {
  // splitmix64 + Box-Muller, independent of the library's generator setup
  std::uint64_t state = seed;
  auto next_u64 = [&state]() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  };
  auto next_unit = [&]() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; };

  std::vector<double> raw_acc(static_cast<std::size_t>(order) + 1, 0.0);
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(samples));
  bool have_spare = false;
  double spare = 0.0;
  auto next_normal = [&]() {
    if (have_spare) {
      have_spare = false;
      return spare;
    }
    const double u1 = next_unit();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare = r * std::sin(2.0 * M_PI * u2);
    have_spare = true;
    return r * std::cos(2.0 * M_PI * u2);
  };

  for (long s = 0; s < samples; ++s) {
    const double u = next_unit();
    double acc = 0.0;
    std::size_t comp = weights.size() - 1;
    for (std::size_t k = 0; k < weights.size(); ++k) {
      acc += weights[k];
      if (u <= acc) {
        comp = k;
        break;
      }
    }
    const double x = means[comp] + stddevs[comp] * next_normal();
    xs.push_back(x);
    double p = 1.0;
    for (int i = 0; i <= order; ++i) {
      raw_acc[static_cast<std::size_t>(i)] += p;
      p *= x;
    }
  }

  McMoments mc;
  mc.raw.resize(static_cast<std::size_t>(order) + 1);
  for (int i = 0; i <= order; ++i) {
    mc.raw[static_cast<std::size_t>(i)] = raw_acc[static_cast<std::size_t>(i)] / samples;
  }
  const double mean = mc.raw[1];
  mc.central.assign(static_cast<std::size_t>(order) + 1, 0.0);
  for (double x : xs) {
    double p = 1.0;
    const double dx = x - mean;
    for (int i = 0; i <= order; ++i) {
      mc.central[static_cast<std::size_t>(i)] += p;
      p *= dx;
    }
  }
  for (int i = 0; i <= order; ++i) mc.central[static_cast<std::size_t>(i)] /= samples;
  return mc;
}

double erf_as(double x) {
  const double sign = x < 0.0 ? -1.0 : 1.0;
  const double ax = std::abs(x);
  const double t = 1.0 / (1.0 + 0.3275911 * ax);
  const double poly =
      t * (0.254829592 + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
  return sign * (1.0 - poly * std::exp(-ax * ax));
}

ScanResult grid_minimize_1d(const std::function<double(double)>& f, double lo, double hi,
                            double step) {
  ScanResult best;
  best.value = 1e300;
  auto sweep = [&](double a, double b, double h) {
    for (double x = a; x <= b + 1e-15; x += h) {
      const double v = f(x);
      if (v < best.value) {
        best.value = v;
        best.x = x;
      }
    }
  };
  sweep(lo, hi, step);
  for (double h = step / 10.0; h >= step / 100.0 - 1e-18; h /= 10.0) {
    sweep(best.x - 15.0 * h * 10.0, best.x + 15.0 * h * 10.0, h);
  }
  return best;
}

double invert_cdf(const std::function<double(double)>& cdf, double p, double lo, double hi) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace oracles
