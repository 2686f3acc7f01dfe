// Command line front end. Exit codes: 0 success, 1 error (invalid input,
// failed analysis), 2 benchmark or gradient check outside tolerance.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "ffdshell/benchmarks.hpp"
#include "ffdshell/errors.hpp"
#include "ffdshell/io.hpp"

namespace fs = std::filesystem;
using namespace ffdshell;

namespace {

// --out wins over FFDSHELL_OUTPUT_DIR, which wins over the config entry.
std::string output_dir(const std::string& flag, const std::string& fallback) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("FFDSHELL_OUTPUT_DIR"); env && *env) return env;
  return fallback;
}

struct Model {
  GeometryData geometry;
  RunConfig config;
};

Model load_model(const std::string& geometry, const std::string& config) {
  Model m;
  m.geometry = load_geometry(geometry);
  if (!config.empty()) m.config = load_config(config);
  return m;
}

void write_results(const RunConfig& c, const std::string& dir, const CoupledSystem& sys, const Vec& u) {
  fs::create_directories(dir);
  save_state((fs::path(dir) / "state.json").string(), sys, u);
  if (c.export_vtk) export_vtk(state_of(sys, u), (fs::path(dir) / "vtk").string(), c.vtk_samples);
}

int analyze(const Model& m, const std::string& out) {
  CoupledSystem sys(make_system(m.geometry, m.config));
  Vec u;
  const SolveReport r = newton_solve(sys, u, m.config.newton);
  std::cout << "dofs " << sys.num_dofs() << "\nnewton_iterations " << r.iterations << "\nconverged "
            << (r.converged ? "yes" : "no") << '\n';
  if (!r.converged) {
    std::cerr << "analysis failed: " << r.message << '\n';
    return 1;
  }
  std::cout << std::setprecision(10) << "internal_energy " << sys.internal_energy(u) << '\n';
  double gap = 0.0;
  for (double g : intersection_gaps(sys)) gap = std::max(gap, g);
  std::cout << "max_intersection_gap " << gap << '\n';
  const std::string dir = output_dir(out, m.config.output_dir);
  write_results(m.config, dir, sys, u);
  std::cout << "output " << dir << '\n';
  return 0;
}

int optimize(Model m, const std::string& mode, const std::string& out, bool verbose) {
  if (!mode.empty()) m.config.problem.mode = parse_design_mode(mode);
  CoupledSystem sys(make_system(m.geometry, m.config));
  DesignSpace ds(sys, make_design(m.config, sys));
  m.config.problem.newton = m.config.newton;
  OptProblem problem(sys, ds, m.config.problem);
  if (problem.num_vars() == 0) throw ValidationError("no design variables for mode " + to_string(m.config.problem.mode));
  OptimizerOptions oo = m.config.optimizer;
  if (verbose)
    oo.callback = [](int it, const Vec&, const NlpEval& e) {
      std::cerr << "iter " << it << "  f " << e.f << "  |g| " << e.g.norm() << '\n';
    };
  const OptimizationOutcome r = run_optimization(problem, SqpOptimizer(oo));
  double gap = 0.0;
  for (double g : r.gaps) gap = std::max(gap, g);
  std::cout << std::setprecision(10) << "design_variables " << problem.num_vars() << "\niterations "
            << r.result.iterations << "\nconverged " << (r.result.converged ? "yes" : "no") << "\nmessage "
            << r.result.message << "\nW_int " << r.W_int << "\nreduction_percent " << 100.0 * r.reduction
            << "\nvolume_error " << r.volume_error << "\nmax_intersection_gap " << gap << '\n';
  const std::string dir = output_dir(out, m.config.output_dir);
  write_results(m.config, dir, sys, problem.state());
  std::ofstream csv(fs::path(dir) / "history.csv");
  problem.write_history_csv(csv);
  std::cout << "output " << dir << '\n';
  return 0;
}

int check_gradients(Model m, const std::string& mode, int directions, double step) {
  if (!mode.empty()) m.config.problem.mode = parse_design_mode(mode);
  CoupledSystem sys(make_system(m.geometry, m.config));
  DesignSpace ds(sys, make_design(m.config, sys));
  m.config.problem.newton = m.config.newton;
  OptProblem problem(sys, ds, m.config.problem);
  if (problem.num_vars() == 0) throw ValidationError("no design variables");
  const auto c = problem.gradient_check(Vec::Zero(problem.num_vars()), directions, step);
  std::cout << std::setprecision(3) << "objective_error " << c.objective << "\nvolume_error " << c.volume << '\n';
  return c.objective < 1e-4 && c.volume < 1e-8 ? 0 : 2;
}

int benchmark(const std::string& name, const std::string& out, bool verbose) {
  std::vector<std::string> names;
  if (name == "all") names = benchmark_names();
  else names = {name};
  BenchmarkOptions opt;
  opt.output_dir = output_dir(out, "");
  opt.verbose = verbose;
  bool all = true;
  for (const std::string& n : names) {
    const BenchmarkReport r = run_benchmark(n, opt);
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << "  (" << std::fixed << std::setprecision(1) << r.seconds
              << " s, " << r.iterations << " iterations, converged " << (r.converged ? "yes" : "no") << ")\n"
              << std::defaultfloat;
    for (const Metric& mt : r.metrics) {
      std::cout << "  " << std::setw(34) << std::left << mt.name << std::right << std::setprecision(8) << mt.value;
      if (!std::isnan(mt.tolerance))
        std::cout << "  expected " << mt.expected << " +- " << mt.tolerance << (mt.pass ? "" : "  <-- fail");
      std::cout << '\n';
    }
    all = all && r.pass;
  }
  return all ? 0 : 2;
}

int export_state(const std::string& state, const std::string& out, int samples) {
  const auto files = export_vtk(load_state(state), out, samples);
  for (const auto& f : files) std::cout << f << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kirchhoff-Love shell analysis and FFD optimization of non-matching NURBS patches"};
  app.require_subcommand(1);
  std::string geometry, config, out, mode, name, state;
  bool verbose = false;
  int directions = 5, samples = 4;
  double step = 1e-4;

  auto add_model = [&](CLI::App* c) {
    c->add_option("geometry", geometry, "Geometry JSON file")->required()->check(CLI::ExistingFile);
    c->add_option("config", config, "Run configuration JSON file")->check(CLI::ExistingFile);
  };
  auto* an = app.add_subcommand("analyze", "Solve the coupled shell problem");
  add_model(an);
  an->add_option("-o,--out", out, "Output directory");
  auto* op = app.add_subcommand("optimize", "Minimize the internal energy over the FFD design");
  add_model(op);
  op->add_option("-m,--mode", mode, "shape, thickness or both");
  op->add_option("-o,--out", out, "Output directory");
  op->add_flag("-v,--verbose", verbose, "Print optimizer iterations");
  auto* gc = app.add_subcommand("check-gradients", "Compare adjoint gradients with finite differences");
  add_model(gc);
  gc->add_option("-m,--mode", mode, "shape, thickness or both");
  gc->add_option("-n,--directions", directions, "Random directions")->check(CLI::PositiveNumber);
  gc->add_option("--step", step, "Finite-difference step in scaled variables")->check(CLI::PositiveNumber);
  auto* bm = app.add_subcommand("benchmark", "Run a reference benchmark");
  bm->add_option("name", name, "Benchmark name or 'all'")->required();
  bm->add_option("-o,--out", out, "Write histories, states and VTK files here");
  bm->add_flag("-v,--verbose", verbose, "Print optimizer iterations");
  auto* ex = app.add_subcommand("export", "Write VTK files for a saved state");
  ex->add_option("state", state, "State JSON file")->required()->check(CLI::ExistingFile);
  ex->add_option("-o,--out", out, "Output directory")->required();
  ex->add_option("-s,--samples", samples, "Subdivisions per element")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*an) return analyze(load_model(geometry, config), out);
    if (*op) return optimize(load_model(geometry, config), mode, out, verbose);
    if (*gc) return check_gradients(load_model(geometry, config), mode, directions, step);
    if (*bm) {
      if (name != "all") {
        const auto& n = benchmark_names();
        if (std::find(n.begin(), n.end(), name) == n.end()) {
          std::cerr << "unknown benchmark '" << name << "'; available: all";
          for (const auto& s : n) std::cerr << ' ' << s;
          std::cerr << '\n';
          return 1;
        }
      }
      return benchmark(name, out, verbose);
    }
    if (*ex) return export_state(state, out, samples);
  } catch (const SchemaError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
