#pragma once

#include <string>
#include <variant>

#include <json.hpp>

#include "dmx/evalkit.hpp"
#include "dmx/problem.hpp"

namespace dmx {

using Json = nlohmann::ordered_json;

Json to_json(const MomentTable& table);
MomentTable moment_table_from_json(const Json& j);

Json to_json(const SolverOptions& opts);
SolverOptions solver_options_from_json(const Json& j, SolverOptions base = {});

Json to_json(const SolverTrace& trace);

/// Problem schema:
/// {"dim": N, "L": L, "symmetric": bool, "mean": [..], "moments":
///  [{"index": [..], "value": v}, ...], "solver": {...}}
/// "mean" is required exactly when "symmetric" is true.
Json to_json(const DmaProblem& problem);
DmaProblem problem_from_json(const Json& j);

/// Full machine-readable result, including an echo of the target table and
/// the solver options so downstream evaluation is self-contained.
Json to_json(const SolutionReport& report, const MomentTable& target, const SolverOptions& opts);

/// Density spec for moment generation and evaluation references:
///   {"type": "gaussian", "mean": m, "stddev": s}
///   {"type": "gaussian-mixture", "components": [{"weight": w, "mean": m, "stddev": s}, ...]}
///   {"type": "dirac-mixture", "locations": [[..], ...], "weights": [..]}
using DensitySpec = std::variant<ScalarGaussian, ScalarGaussianMixture, DiracMixture>;
DensitySpec density_from_json(const Json& j);

/// 17 significant digits, for the CSV outputs.
std::string format_g17(double v);

/// One row per component: x1..xN, d, w.
std::string points_csv(const SolutionReport& report);

/// One row per component: x1..xN, d, w, h.
std::string pwc_csv(const SolutionReport& report);

/// FNV-1a 64-bit digest as fixed-width hex; keys the run manifest.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace dmx
