#include "dmx/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dmx {

std::vector<EcdfStep> ecdf_1d(const DiracMixture& dm) {
  if (dm.dim() != 1) throw std::invalid_argument("ecdf_1d: mixture must be one-dimensional");
  std::vector<int> order(static_cast<std::size_t>(dm.count()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return dm.locations(0, a) < dm.locations(0, b); });
  std::vector<EcdfStep> steps;
  steps.reserve(order.size());
  double cum = 0.0;
  for (int i : order) {
    cum += dm.weights[i];
    steps.push_back({dm.locations(0, i), cum});
  }
  return steps;
}

namespace {

double ecdf_at(const std::vector<EcdfStep>& steps, double x) {
  // cumulative weight of the last step at or before x
  int lo = 0;
  int hi = static_cast<int>(steps.size());
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    if (steps[static_cast<std::size_t>(mid)].x <= x) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return lo == 0 ? 0.0 : steps[static_cast<std::size_t>(lo - 1)].cum;
}

}  // namespace

double cvm_distance_1d(const DiracMixture& dm, const CdfFn& reference, int nodes, double padding) {
  if (dm.dim() != 1) throw std::invalid_argument("cvm_distance_1d: mixture must be one-dimensional");
  if (nodes < 2) throw std::invalid_argument("cvm_distance_1d: need at least 2 nodes");
  const auto steps = ecdf_1d(dm);
  const double lo = steps.front().x - padding;
  const double hi = steps.back().x + padding;
  const double width = (hi - lo) / nodes;

  // Stieltjes midpoint rule: sum (F_dm - F_ref)^2 at cell midpoints weighted
  // by the reference mass of the cell.
  double acc = 0.0;
  double f_left = reference(lo);
  for (int j = 0; j < nodes; ++j) {
    const double right = lo + (j + 1) * width;
    const double mid = lo + (j + 0.5) * width;
    const double f_right = reference(right);
    const double diff = ecdf_at(steps, mid) - reference(mid);
    acc += diff * diff * (f_right - f_left);
    f_left = f_right;
  }
  // tails outside the padded window: F_dm is constant 0 / 1 there
  const double f_lo = reference(lo);
  const double f_hi = reference(hi);
  double tail = 0.0;
  {
    // integral of F_ref^2 dF_ref over [0, F(lo)] and (1 - F_ref)^2 over [F(hi), 1]
    tail += f_lo * f_lo * f_lo / 3.0;
    const double s = 1.0 - f_hi;
    tail += s * s * s / 3.0;
  }
  return acc + tail;
}

CdfFn reference_cdf_gaussian(double mean, double stddev) {
  ScalarGaussian g{mean, stddev};
  g.validate();
  return [mean, stddev](double x) {
    return 0.5 * std::erfc(-(x - mean) / (stddev * std::sqrt(2.0)));
  };
}

CdfFn reference_cdf_gm(const ScalarGaussianMixture& gm) {
  gm.validate();
  std::vector<std::pair<double, CdfFn>> parts;
  parts.reserve(gm.components.size());
  for (const auto& [w, g] : gm.components) {
    parts.emplace_back(w, reference_cdf_gaussian(g.mean, g.stddev));
  }
  return [parts](double x) {
    double acc = 0.0;
    for (const auto& [w, cdf] : parts) acc += w * cdf(x);
    return acc;
  };
}

namespace {

ScalarGaussianMixture bimodal_mixture() {
  ScalarGaussianMixture gm;
  gm.components = {{0.4, {-1.5, 0.7}}, {0.6, {1.5, 0.7}}};
  return gm;
}

MomentTable scalar_table_from_raw(const std::vector<double>& raw, int order, bool include_zero) {
  MomentTable table(1, order);
  for (int i = include_zero ? 0 : 1; i <= order; ++i) {
    table.set(MultiIndex({i}), raw[static_cast<std::size_t>(i)]);
  }
  return table;
}

}  // namespace

ExperimentPreset preset(const std::string& name) {
  ExperimentPreset p;
  p.name = name;
  if (name == "gauss1d") {
    p.component_counts = {6, 10, 15};
    p.default_count = 6;
    p.reference = ScalarGaussian{0.0, 1.0};
    p.make_problem = [](int count) {
      ScalarGaussian g{0.0, 1.0};
      MomentTable table(1, 2);
      table.set(MultiIndex({1}), gaussian_raw_moment(1, g));
      table.set(MultiIndex({2}), gaussian_raw_moment(2, g));
      return DmaProblem(1, count, std::move(table));
    };
  } else if (name == "gm1d_m4" || name == "gm1d_m6") {
    const int order = name == "gm1d_m4" ? 4 : 6;
    p.component_counts = order == 4 ? std::vector<int>{10} : std::vector<int>{15, 25};
    p.default_count = p.component_counts.front();
    p.reference = bimodal_mixture();
    p.make_problem = [order](int count) {
      const auto raw = mixture_raw_moments(bimodal_mixture(), order);
      return DmaProblem(1, count, scalar_table_from_raw(raw, order, /*include_zero=*/true));
    };
  } else if (name == "gauss2d_sym") {
    p.component_counts = {16, 20, 30, 40};
    p.default_count = 40;
    p.reference = std::monostate{};
    p.make_problem = [](int count) {
      MomentTable table(2, 2);
      table.set(MultiIndex({0, 0}), 1.0);
      table.set(MultiIndex({0, 1}), 0.0);
      table.set(MultiIndex({1, 0}), 0.0);
      table.set(MultiIndex({1, 1}), 0.0);
      table.set(MultiIndex({2, 0}), 1.0);
      table.set(MultiIndex({0, 2}), 3.0);
      DmaProblem problem(2, count, std::move(table));
      problem.symmetric = true;
      problem.prescribed_mean = Eigen::Vector2d(0.0, 0.0);
      return problem;
    };
  } else {
    throw std::invalid_argument("preset: unknown name '" + name + "'");
  }
  return p;
}

std::vector<std::string> preset_names() {
  return {"gauss1d", "gm1d_m4", "gm1d_m6", "gauss2d_sym"};
}

CdfFn reference_cdf(const ReferenceDensity& reference) {
  if (std::holds_alternative<ScalarGaussian>(reference)) {
    const auto& g = std::get<ScalarGaussian>(reference);
    return reference_cdf_gaussian(g.mean, g.stddev);
  }
  if (std::holds_alternative<ScalarGaussianMixture>(reference)) {
    return reference_cdf_gm(std::get<ScalarGaussianMixture>(reference));
  }
  return nullptr;
}

}  // namespace dmx
