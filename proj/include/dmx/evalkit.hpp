#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "dmx/problem.hpp"

namespace dmx {

struct EcdfStep {
  double x = 0.0;
  double cum = 0.0;
};

/// Empirical CDF of a one-dimensional mixture as sorted step pairs; the last
/// cumulative weight is 1.
std::vector<EcdfStep> ecdf_1d(const DiracMixture& dm);

using CdfFn = std::function<double(double)>;

/// Reference-weighted squared CDF discrepancy
///   integral (F_dm - F_ref)^2 dF_ref
/// computed with a deterministic midpoint rule on `nodes` cells spanning the
/// mixture support padded by `padding` on both sides.
double cvm_distance_1d(const DiracMixture& dm, const CdfFn& reference, int nodes = 10000,
                       double padding = 10.0);

CdfFn reference_cdf_gaussian(double mean, double stddev);
CdfFn reference_cdf_gm(const ScalarGaussianMixture& gm);

/// Density the experiment's moments were generated from. Used only after a
/// solve, never visible to the approximation methods.
using ReferenceDensity = std::variant<std::monostate, ScalarGaussian, ScalarGaussianMixture>;

struct ExperimentPreset {
  std::string name;
  std::vector<int> component_counts;  // the component counts the experiment sweeps
  int default_count = 0;
  std::function<DmaProblem(int component_count)> make_problem;
  ReferenceDensity reference;
};

/// Built-in experiment configurations:
///   gauss1d     standard normal, moments up to order 2, L in {6, 10, 15}
///   gm1d_m4     two-component Gaussian mixture, moments up to order 4, L = 10
///   gm1d_m6     same mixture, moments up to order 6, L in {15, 25}
///   gauss2d_sym axis-aligned 2-D moments, symmetric, L in {16, 20, 30, 40}
/// Throws std::invalid_argument for unknown names.
ExperimentPreset preset(const std::string& name);

std::vector<std::string> preset_names();

/// The evaluation reference as a CDF, or nullptr when none applies (2-D).
CdfFn reference_cdf(const ReferenceDensity& reference);

}  // namespace dmx
