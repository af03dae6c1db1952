#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "dmx/json_io.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadInput = 2;
constexpr int kExitNotConverged = 3;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

dmx::Json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return dmx::Json::parse(in);
  } catch (const std::exception& e) {
    throw InputError("failed to parse " + path.string() + ": " + e.what());
  }
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << content;
}

struct SolveConfig {
  std::string input;
  std::string preset;
  std::string manifest;
  std::string method = "auto";
  std::string output_dir = ".";
  std::optional<int> component_count;
  std::optional<std::uint64_t> seed;
  std::optional<int> restarts;
  std::optional<double> tol_eq;
  std::optional<double> eps_slack;
  std::optional<double> d_max;
};

dmx::DmaProblem assemble_problem(const SolveConfig& cfg, std::string& preset_name,
                                 std::string& input_path) {
  if (!cfg.manifest.empty()) {
    const dmx::Json m = read_json_file(cfg.manifest);
    preset_name = m.value("preset", "");
    input_path = m.value("input", "");
    return dmx::problem_from_json(m.at("problem"));
  }
  if (cfg.input.empty() == cfg.preset.empty()) {
    throw InputError("exactly one of --input or --preset is required");
  }
  if (!cfg.preset.empty()) {
    preset_name = cfg.preset;
    const dmx::ExperimentPreset p = dmx::preset(cfg.preset);
    const int count = cfg.component_count.value_or(p.default_count);
    return p.make_problem(count);
  }
  input_path = cfg.input;
  dmx::DmaProblem problem = dmx::problem_from_json(read_json_file(cfg.input));
  if (cfg.component_count) {
    problem.component_count = *cfg.component_count;
    problem.validate();
  }
  return problem;
}

int run_solve(const SolveConfig& cfg) {
  std::string preset_name;
  std::string input_path;
  dmx::DmaProblem problem = assemble_problem(cfg, preset_name, input_path);

  std::string method = cfg.method;
  if (!cfg.manifest.empty()) {
    const dmx::Json m = read_json_file(cfg.manifest);
    method = m.value("method", "auto");
  }
  if (cfg.seed) problem.options.seed = *cfg.seed;
  if (cfg.restarts) problem.options.restarts = *cfg.restarts;
  if (cfg.tol_eq) problem.options.tol_eq = *cfg.tol_eq;
  if (cfg.eps_slack) problem.options.eps_slack = *cfg.eps_slack;
  if (cfg.d_max) problem.options.d_max = *cfg.d_max;
  problem.validate();

  dmx::SolutionReport report;
  if (method == "auto") {
    report = dmx::solve_auto(problem);
  } else if (method == "maxent") {
    report = dmx::solve_max_entropy(problem);
  } else if (method == "lm") {
    report = dmx::solve_lm_baseline(problem);
  } else {
    throw InputError("unknown method '" + method + "' (expected auto, maxent or lm)");
  }

  const fs::path out_dir(cfg.output_dir);
  fs::create_directories(out_dir);

  const dmx::Json problem_json = dmx::to_json(problem);
  dmx::Json manifest;
  manifest["command"] = "solve";
  manifest["method"] = method;
  manifest["preset"] = preset_name;
  manifest["input"] = input_path;
  manifest["input_digest"] = dmx::fnv1a_hex(problem_json.dump());
  manifest["problem"] = problem_json;

  write_file(out_dir / "solution.json",
             dmx::to_json(report, problem.target, problem.options).dump(2) + "\n");
  write_file(out_dir / "points.csv", dmx::points_csv(report));
  write_file(out_dir / "pwc.csv", dmx::pwc_csv(report));
  write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");

  if (!report.converged) {
    std::cerr << "solve did not converge: " << report.trace.message << "\n";
    return kExitNotConverged;
  }
  std::cout << "case " << dmx::to_string(report.determinedness) << ", residual norm "
            << report.moment_residual_norm << ", entropy " << report.entropy << "\n";
  return kExitOk;
}

int run_moments(const std::string& input, int order, const std::string& output_dir) {
  if (order < 0) throw InputError("--order must be >= 0");
  const dmx::DensitySpec spec = dmx::density_from_json(read_json_file(input));

  dmx::MomentTable table(1, order);
  if (std::holds_alternative<dmx::ScalarGaussian>(spec)) {
    const auto& g = std::get<dmx::ScalarGaussian>(spec);
    for (int i = 0; i <= order; ++i) {
      table.set(dmx::MultiIndex({i}), i == 0 ? 1.0 : dmx::gaussian_raw_moment(i, g));
    }
  } else if (std::holds_alternative<dmx::ScalarGaussianMixture>(spec)) {
    const auto raw = dmx::mixture_raw_moments(std::get<dmx::ScalarGaussianMixture>(spec), order);
    for (int i = 0; i <= order; ++i) {
      table.set(dmx::MultiIndex({i}), raw[static_cast<std::size_t>(i)]);
    }
  } else {
    table = dmx::dirac_moments(std::get<dmx::DiracMixture>(spec), order);
  }

  const fs::path out_dir(output_dir);
  fs::create_directories(out_dir);
  write_file(out_dir / "moments.json", dmx::to_json(table).dump(2) + "\n");
  return kExitOk;
}

int run_eval(const std::string& solution_path, const std::string& preset_name,
             const std::string& reference_path, const std::string& output_dir) {
  const dmx::Json sol = read_json_file(solution_path);

  dmx::DiracMixture dm;
  {
    const auto locations = sol.at("locations").get<std::vector<std::vector<double>>>();
    const auto weights = sol.at("weights").get<std::vector<double>>();
    const int dim = sol.at("dim").get<int>();
    dm.locations.resize(dim, static_cast<Eigen::Index>(locations.size()));
    for (std::size_t i = 0; i < locations.size(); ++i) {
      if (static_cast<int>(locations[i].size()) != dim) {
        throw InputError("solution locations are ragged");
      }
      for (int k = 0; k < dim; ++k) dm.locations(k, static_cast<Eigen::Index>(i)) = locations[i][k];
    }
    dm.weights = Eigen::Map<const Eigen::VectorXd>(weights.data(),
                                                   static_cast<Eigen::Index>(weights.size()));
  }
  const auto diameters = sol.at("diameters").get<std::vector<double>>();
  const Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(
      diameters.data(), static_cast<Eigen::Index>(diameters.size()));
  const dmx::MomentTable target = dmx::moment_table_from_json(sol.at("target"));
  const dmx::SolverOptions opts = dmx::solver_options_from_json(sol.at("solver"));

  if (target.dim() != dm.dim()) throw InputError("solution and target dimensions differ");

  dmx::CdfFn reference;
  if (!preset_name.empty()) {
    reference = dmx::reference_cdf(dmx::preset(preset_name).reference);
  } else if (!reference_path.empty()) {
    const dmx::DensitySpec spec = dmx::density_from_json(read_json_file(reference_path));
    if (std::holds_alternative<dmx::ScalarGaussian>(spec)) {
      const auto& g = std::get<dmx::ScalarGaussian>(spec);
      reference = dmx::reference_cdf_gaussian(g.mean, g.stddev);
    } else if (std::holds_alternative<dmx::ScalarGaussianMixture>(spec)) {
      reference = dmx::reference_cdf_gm(std::get<dmx::ScalarGaussianMixture>(spec));
    } else {
      throw InputError("--reference must be a gaussian or gaussian-mixture spec");
    }
  }
  if (reference && dm.dim() != 1) {
    throw InputError("a CDF reference applies to one-dimensional solutions only");
  }

  const dmx::ResidualResult res = dmx::residual(dmx::dirac_moments(dm, target.order()), target);
  const auto feas = dmx::check_feasible(dm.locations, d, opts.eps_slack);
  double entropy_value = -std::numeric_limits<double>::infinity();
  if (feas.feasible) entropy_value = dmx::entropy(dmx::PwcDensity{dm, d});

  dmx::Json out;
  out["residual_norm"] = res.norm;
  out["max_abs_residual"] =
      res.values.size() > 0 ? res.values.lpNorm<Eigen::Infinity>() : 0.0;
  out["entropy"] = std::isfinite(entropy_value) ? dmx::Json(entropy_value) : dmx::Json(nullptr);
  out["feasible"] = feas.feasible;
  out["converged"] = sol.value("converged", false);
  if (reference) out["cvm_distance"] = dmx::cvm_distance_1d(dm, reference);

  const fs::path out_dir(output_dir);
  fs::create_directories(out_dir);
  write_file(out_dir / "eval.json", out.dump(2) + "\n");

  if (reference) {
    const auto steps = dmx::ecdf_1d(dm);
    std::string ecdf = "x,cum\n";
    for (const auto& s : steps) {
      ecdf += dmx::format_g17(s.x) + "," + dmx::format_g17(s.cum) + "\n";
    }
    write_file(out_dir / "ecdf.csv", ecdf);

    const double lo = steps.front().x - 3.0;
    const double hi = steps.back().x + 3.0;
    std::string ref_csv = "x,cdf\n";
    for (int i = 0; i < 1000; ++i) {
      const double x = lo + (hi - lo) * i / 999.0;
      ref_csv += dmx::format_g17(x) + "," + dmx::format_g17(reference(x)) + "\n";
    }
    write_file(out_dir / "refcdf.csv", ref_csv);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dirac mixtures with prescribed moments and maximum-entropy spread"};
  app.require_subcommand(1);

  SolveConfig solve_cfg;
  CLI::App* solve = app.add_subcommand("solve", "solve a moment problem");
  solve->add_option("--input", solve_cfg.input, "problem JSON file");
  solve->add_option("--preset", solve_cfg.preset, "built-in experiment preset");
  solve->add_option("--manifest", solve_cfg.manifest, "re-run from a manifest.json");
  solve->add_option("--L", solve_cfg.component_count, "number of mixture components");
  solve->add_option("--method", solve_cfg.method, "auto | maxent | lm")
      ->default_str("auto");
  solve->add_option("--output-dir", solve_cfg.output_dir, "output directory")->default_str(".");
  solve->add_option("--seed", solve_cfg.seed, "seed override");
  solve->add_option("--restarts", solve_cfg.restarts, "restart count override");
  solve->add_option("--tol-eq", solve_cfg.tol_eq, "equality tolerance override");
  solve->add_option("--eps-slack", solve_cfg.eps_slack, "collision slack override");
  solve->add_option("--d-max", solve_cfg.d_max, "sphere size cap");

  std::string moments_input;
  int moments_order = 2;
  std::string moments_out = ".";
  CLI::App* moments = app.add_subcommand("moments", "moments of a density spec");
  moments->add_option("--input", moments_input, "density spec JSON")->required();
  moments->add_option("--order", moments_order, "maximum total order")->required();
  moments->add_option("--output-dir", moments_out, "output directory")->default_str(".");

  std::string eval_solution;
  std::string eval_preset;
  std::string eval_reference;
  std::string eval_out = ".";
  CLI::App* eval = app.add_subcommand("eval", "evaluate a solution");
  eval->add_option("--solution", eval_solution, "solution.json to evaluate")->required();
  eval->add_option("--preset", eval_preset, "take the reference from this preset");
  eval->add_option("--reference", eval_reference, "reference density spec JSON");
  eval->add_option("--output-dir", eval_out, "output directory")->default_str(".");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << e.what() << "\n";
    return kExitBadInput;
  }

  try {
    if (solve->parsed()) return run_solve(solve_cfg);
    if (moments->parsed()) return run_moments(moments_input, moments_order, moments_out);
    if (eval->parsed()) return run_eval(eval_solution, eval_preset, eval_reference, eval_out);
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  return kExitOk;
}
