#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "cartamr/cartamr.hpp"

namespace {

using namespace cartamr;

Reconstruction parse_reconstruction(const std::string& s) {
  if (s == "average") return Reconstruction::Average;
  if (s == "average_plus") return Reconstruction::AveragePlus;
  if (s == "postprocess") return Reconstruction::PostProcessing;
  throw InvalidArgument("unknown reconstruction '" + s + "'");
}

struct SolverFlags {
  double outer_tol = 1e-6;
  double inner_tol = 1e-2;
  int max_inner = 20;
  int max_outer = 5000;
  bool chebyshev = false;

  void add(CLI::App* app) {
    app->add_option("--tol", outer_tol, "outer tolerance on the residual")->capture_default_str();
    app->add_option("--inner-tol", inner_tol, "relative change stopping inner sweeps")->capture_default_str();
    app->add_option("--max-inner", max_inner, "inner sweeps per group and outer iteration")->capture_default_str();
    app->add_option("--max-outer", max_outer, "outer iteration cap")->capture_default_str();
    app->add_flag("--chebyshev", chebyshev, "extrapolate outer iterates");
  }
  SolverConfig config() const {
    SolverConfig c;
    c.outer_tol = outer_tol;
    c.inner_tol = inner_tol;
    c.max_inner = max_inner;
    c.max_outer = max_outer;
    c.chebyshev = chebyshev;
    return c;
  }
};

CartesianMesh initial_mesh(const ProblemDefinition& p, double step) {
  if (step > 0.0) return p.regions.uniform_mesh(std::vector<double>(static_cast<std::size_t>(p.dim()), step));
  return p.initial_mesh();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed RT0 multigroup diffusion with adaptive Cartesian refinement"};
  app.require_subcommand(1);

  std::string path, out_vtk, out_state, out_dir = "amr_out", recon = "postprocess", strategy = "direction";
  double step = 0.0, theta = 0.5, eps_amr = 0.06;
  int max_iter = 10;
  std::size_t max_cells = 0;
  bool warm_start = false;
  SolverFlags sf;

  auto* validate = app.add_subcommand("validate", "check material hypotheses and print the report");
  validate->add_option("materials", path, "material library (JSON)")->required();

  auto* solve = app.add_subcommand("solve", "solve on one mesh");
  solve->add_option("problem", path, "problem file (JSON)")->required();
  solve->add_option("--step", step, "uniform mesh step (default: the problem's mesh_step)");
  solve->add_option("--reconstruction", recon, "average | average_plus | postprocess")->capture_default_str();
  solve->add_option("--vtk", out_vtk, "write fields to this VTK file");
  solve->add_option("--state", out_state, "write the discrete state to this file");
  sf.add(solve);

  auto* amr = app.add_subcommand("amr", "run the adaptive loop");
  amr->add_option("problem", path, "problem file (JSON)")->required();
  amr->add_option("--step", step, "uniform initial mesh step");
  amr->add_option("--theta", theta, "marking fraction")->capture_default_str();
  amr->add_option("--eps", eps_amr, "stop once max eta_K is below this")->capture_default_str();
  amr->add_option("--max-iter", max_iter, "refinement cap")->capture_default_str();
  amr->add_option("--max-cells", max_cells, "stop before a mesh would exceed this size (0: none)");
  amr->add_option("--reconstruction", recon, "average | average_plus | postprocess")->capture_default_str();
  amr->add_option("--strategy", strategy, "direction | bulk")->capture_default_str();
  amr->add_flag("--warm-start", warm_start, "start each solve from the injected previous state");
  amr->add_option("--out", out_dir, "output directory")->capture_default_str();
  sf.add(amr);

  auto* exp = app.add_subcommand("export", "re-emit fields from a saved state");
  exp->add_option("problem", path, "problem file (JSON)")->required();
  exp->add_option("state", out_state, "saved state")->required();
  exp->add_option("--vtk", out_vtk, "output VTK file")->required();
  exp->add_option("--reconstruction", recon, "average | average_plus | postprocess")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      const auto set = load_material_library(path);
      std::cout << format_validation_report(validate_assumptions(set));
      return 0;
    }

    if (solve->parsed()) {
      const auto problem = load_problem(path);
      const auto mesh = initial_mesh(problem, step);
      BlockOperators ops(mesh, problem);
      const auto se = solve_and_estimate(problem, ops, sf.config(), parse_reconstruction(recon));
      std::printf("cells: %zu\n", mesh.num_cells());
      std::printf("outer iterations: %d\n", se.report.iterations());
      if (problem.mode == ProblemMode::Criticality) std::printf("keff: %.6f\n", se.state.k);
      std::printf("max eta_K: %.6g\n", se.estimators.max_eta());
      std::printf("eta(T_h): %.6g\n", se.estimators.global);
      if (!out_vtk.empty())
        detail::write_file(out_vtk, format_solution_vtk(ops, se.state, se.estimators, se.field));
      if (!out_state.empty()) save_state(out_state, mesh, se.state);
      return 0;
    }

    if (amr->parsed()) {
      const auto problem = load_problem(path);
      AmrConfig ac;
      ac.eps_amr = eps_amr;
      ac.max_iterations = max_iter;
      ac.max_cells = max_cells;
      ac.warm_start = warm_start;
      ac.reconstruction = parse_reconstruction(recon);
      MarkConfig mc;
      mc.theta = theta;
      if (strategy == "direction") mc.strategy = MarkStrategy::Direction;
      else if (strategy == "bulk") mc.strategy = MarkStrategy::Bulk;
      else throw InvalidArgument("unknown strategy '" + strategy + "'");
      const auto res = run_amr(problem, initial_mesh(problem, step), ac, mc, sf.config());
      std::filesystem::create_directories(out_dir);
      const std::filesystem::path dir(out_dir);
      export_trace((dir / "trace.csv").string(), res.trace);
      detail::write_file((dir / "timing.log").string(), format_timing_log(res.trace));
      BlockOperators ops(res.mesh, problem);
      detail::write_file((dir / "fields.vtk").string(),
                         format_solution_vtk(ops, res.state, res.estimators, res.field));
      save_state((dir / "state.json").string(), res.mesh, res.state);
      std::cout << format_trace_csv(res.trace);
      return 0;
    }

    if (exp->parsed()) {
      const auto problem = load_problem(path);
      auto [mesh, state] = load_state(out_state);
      BlockOperators ops(mesh, problem);
      if (!state.matches(ops.layout())) throw DimensionMismatch("saved state does not match the problem");
      const auto field = reconstruct(parse_reconstruction(recon), ops, state, problem.boundary);
      const SourceField src = problem.mode == ProblemMode::Source ? problem.source : SourceField{};
      const auto est = estimate(ops, state, field, src);
      detail::write_file(out_vtk, format_solution_vtk(ops, state, est, field));
      return 0;
    }
  } catch (const cartamr::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
