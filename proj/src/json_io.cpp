#include "dmx/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace dmx {

namespace {

Json number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

Json to_json(const MomentTable& table) {
  Json j;
  j["dim"] = table.dim();
  j["order"] = table.order();
  Json entries = Json::array();
  for (const auto& [kappa, value] : table.entries()) {
    entries.push_back({{"index", kappa.exponents()}, {"value", value}});
  }
  j["entries"] = entries;
  return j;
}

MomentTable moment_table_from_json(const Json& j) {
  MomentTable table(j.at("dim").get<int>(), j.at("order").get<int>());
  for (const auto& entry : j.at("entries")) {
    table.set(MultiIndex(entry.at("index").get<std::vector<int>>()),
              entry.at("value").get<double>());
  }
  return table;
}

Json to_json(const SolverOptions& opts) {
  Json j;
  j["tol_eq"] = opts.tol_eq;
  j["tol_obj"] = opts.tol_obj;
  j["eps_slack"] = opts.eps_slack;
  j["max_outer"] = opts.max_outer;
  j["max_inner"] = opts.max_inner;
  j["penalty_init"] = opts.penalty_init;
  j["penalty_growth"] = opts.penalty_growth;
  j["penalty_cap"] = opts.penalty_cap;
  j["seed"] = opts.seed;
  j["restarts"] = opts.restarts;
  j["d_max"] = opts.d_max ? Json(*opts.d_max) : Json(nullptr);
  return j;
}

SolverOptions solver_options_from_json(const Json& j, SolverOptions base) {
  if (j.contains("tol_eq")) base.tol_eq = j.at("tol_eq").get<double>();
  if (j.contains("tol_obj")) base.tol_obj = j.at("tol_obj").get<double>();
  if (j.contains("eps_slack")) base.eps_slack = j.at("eps_slack").get<double>();
  if (j.contains("max_outer")) base.max_outer = j.at("max_outer").get<int>();
  if (j.contains("max_inner")) base.max_inner = j.at("max_inner").get<int>();
  if (j.contains("penalty_init")) base.penalty_init = j.at("penalty_init").get<double>();
  if (j.contains("penalty_growth")) base.penalty_growth = j.at("penalty_growth").get<double>();
  if (j.contains("penalty_cap")) base.penalty_cap = j.at("penalty_cap").get<double>();
  if (j.contains("seed")) base.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("restarts")) base.restarts = j.at("restarts").get<int>();
  if (j.contains("d_max") && !j.at("d_max").is_null()) base.d_max = j.at("d_max").get<double>();
  return base;
}

Json to_json(const SolverTrace& trace) {
  Json j;
  j["outer_iterations"] = trace.outer_iterations;
  j["inner_iterations"] = trace.inner_iterations;
  j["final_objective"] = number_or_null(trace.final_objective);
  j["max_equality_violation"] = trace.max_equality_violation;
  j["max_inequality_violation"] = trace.max_inequality_violation;
  j["converged"] = trace.converged;
  j["message"] = trace.message;
  return j;
}

Json to_json(const DmaProblem& problem) {
  Json j;
  j["dim"] = problem.dim;
  j["L"] = problem.component_count;
  j["symmetric"] = problem.symmetric;
  if (problem.prescribed_mean) {
    j["mean"] = std::vector<double>(problem.prescribed_mean->data(),
                                    problem.prescribed_mean->data() + problem.prescribed_mean->size());
  }
  Json moments = Json::array();
  for (const auto& [kappa, value] : problem.target.entries()) {
    moments.push_back({{"index", kappa.exponents()}, {"value", value}});
  }
  j["moments"] = moments;
  j["solver"] = to_json(problem.options);
  return j;
}

DmaProblem problem_from_json(const Json& j) {
  const int dim = j.at("dim").get<int>();
  const int count = j.at("L").get<int>();
  int order = 0;
  std::vector<std::pair<MultiIndex, double>> entries;
  for (const auto& entry : j.at("moments")) {
    MultiIndex kappa(entry.at("index").get<std::vector<int>>());
    order = std::max(order, kappa.order());
    entries.emplace_back(std::move(kappa), entry.at("value").get<double>());
  }
  MomentTable table(dim, order);
  for (auto& [kappa, value] : entries) table.set(kappa, value);

  DmaProblem problem(dim, count, std::move(table));
  if (j.contains("symmetric")) problem.symmetric = j.at("symmetric").get<bool>();
  if (j.contains("mean")) {
    const auto m = j.at("mean").get<std::vector<double>>();
    problem.prescribed_mean =
        Eigen::Map<const Eigen::VectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
  }
  if (j.contains("weights")) {
    const auto w = j.at("weights").get<std::vector<double>>();
    problem.weights =
        Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  }
  if (j.contains("solver")) problem.options = solver_options_from_json(j.at("solver"));
  problem.validate();
  return problem;
}

Json to_json(const SolutionReport& report, const MomentTable& target, const SolverOptions& opts) {
  Json j;
  j["case"] = to_string(report.determinedness);
  j["converged"] = report.converged;
  j["feasible"] = report.feasible;
  j["seed"] = report.seed_used;
  j["entropy"] = number_or_null(report.entropy);
  j["moment_residual_norm"] = report.moment_residual_norm;

  Json residuals = Json::array();
  for (Eigen::Index i = 0; i < report.residuals.values.size(); ++i) {
    residuals.push_back(
        {{"index", report.residuals.indices[static_cast<std::size_t>(i)].exponents()},
         {"value", report.residuals.values[i]}});
  }
  j["residuals"] = residuals;

  j["dim"] = report.mixture.dim();
  j["L"] = report.mixture.count();
  Json locations = Json::array();
  for (int i = 0; i < report.mixture.count(); ++i) {
    std::vector<double> point(report.mixture.locations.col(i).data(),
                              report.mixture.locations.col(i).data() + report.mixture.dim());
    locations.push_back(point);
  }
  j["locations"] = locations;
  j["weights"] = std::vector<double>(report.mixture.weights.data(),
                                     report.mixture.weights.data() + report.mixture.count());
  j["diameters"] = std::vector<double>(report.diameters.data(),
                                       report.diameters.data() + report.diameters.size());
  j["trace"] = to_json(report.trace);
  j["target"] = to_json(target);
  j["solver"] = to_json(opts);
  return j;
}

DensitySpec density_from_json(const Json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "gaussian") {
    ScalarGaussian g{j.at("mean").get<double>(), j.at("stddev").get<double>()};
    g.validate();
    return g;
  }
  if (type == "gaussian-mixture") {
    ScalarGaussianMixture gm;
    for (const auto& c : j.at("components")) {
      gm.components.push_back(
          {c.at("weight").get<double>(), {c.at("mean").get<double>(), c.at("stddev").get<double>()}});
    }
    gm.validate();
    return gm;
  }
  if (type == "dirac-mixture") {
    const auto locations = j.at("locations").get<std::vector<std::vector<double>>>();
    const auto weights = j.at("weights").get<std::vector<double>>();
    if (locations.empty() || locations.size() != weights.size()) {
      throw std::invalid_argument("dirac-mixture spec: locations/weights size mismatch");
    }
    const auto dim = locations.front().size();
    DiracMixture dm;
    dm.locations.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(locations.size()));
    for (std::size_t i = 0; i < locations.size(); ++i) {
      if (locations[i].size() != dim) {
        throw std::invalid_argument("dirac-mixture spec: ragged locations");
      }
      for (std::size_t k = 0; k < dim; ++k) {
        dm.locations(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = locations[i][k];
      }
    }
    dm.weights = Eigen::Map<const Eigen::VectorXd>(weights.data(),
                                                   static_cast<Eigen::Index>(weights.size()));
    dm.validate();
    return dm;
  }
  throw std::invalid_argument("density spec: unknown type '" + type + "'");
}

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::string component_csv(const SolutionReport& report, bool with_heights) {
  const int n = report.mixture.dim();
  std::string out;
  for (int k = 1; k <= n; ++k) out += "x" + std::to_string(k) + ",";
  out += with_heights ? "d,w,h\n" : "d,w\n";
  for (int i = 0; i < report.mixture.count(); ++i) {
    for (int k = 0; k < n; ++k) out += format_g17(report.mixture.locations(k, i)) + ",";
    out += format_g17(report.diameters[i]) + "," + format_g17(report.mixture.weights[i]);
    if (with_heights) {
      const double d = report.diameters[i];
      const double h = d > 0.0 ? report.mixture.weights[i] / sphere_volume(n, d) : 0.0;
      out += "," + format_g17(h);
    }
    out += "\n";
  }
  return out;
}

}  // namespace

std::string points_csv(const SolutionReport& report) { return component_csv(report, false); }

std::string pwc_csv(const SolutionReport& report) { return component_csv(report, true); }

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace dmx
