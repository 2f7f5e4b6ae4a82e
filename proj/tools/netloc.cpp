// netloc: generate, solve, evaluate and sweep noisy-distance localization
// problems from the command line.
//
// Exit codes:
//   0  success
//   1  unexpected error
//   2  invalid flags or parameters
//   3  unreadable or malformed input file
//   4  no sign change found while bracketing (bounds likely infeasible)
//   5  root finder did not reach the root band
//   6  converged but the estimate violates the bounds beyond root_tol
//   7  could not generate a connected network

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "netloc/netloc.hpp"

namespace {

using namespace netloc;

enum Exit : int {
  kOk = 0,
  kFailure = 1,
  kValidation = 2,
  kParse = 3,
  kNoBracket = 4,
  kNotConverged = 5,
  kInfeasible = 6,
  kGeneration = 7,
};

struct SolverFlags {
  SolverConfig cfg;
  RootFinderOptions root;
  double c_init = 0.0;  // 0 selects the default scale
  double c_tol = 0.0;   // 0 selects 1e-3 * c_init
};

void add_solver_flags(CLI::App& app, SolverFlags& f) {
  SolverConfig& c = f.cfg;
  app.add_option("--sigma1", c.sigma1, "Sufficient-decrease constant")->capture_default_str();
  app.add_option("--sigma2", c.sigma2, "Curvature constant")->capture_default_str();
  app.add_option("--gamma", c.gamma, "Shrink mu once |grad| < gamma*mu")->capture_default_str();
  app.add_option("--gamma1", c.gamma1, "Mu shrink factor")->capture_default_str();
  app.add_option("--epsilon", c.epsilon, "Stop once mu < epsilon")->capture_default_str();
  app.add_option("--mu0", c.mu0, "Initial smoothing parameter")->capture_default_str();
  app.add_option("--max-outer", c.max_outer_iterations, "Outer iteration cap")
      ->capture_default_str();
  app.add_option("--max-line-search", c.max_line_search_iterations, "Line search cap")
      ->capture_default_str();
  app.add_option("--multistart", c.multistart_count, "Random starts per minimax")
      ->capture_default_str();
  app.add_option("--root-tol", f.root.root_tol, "Root band half-width")->capture_default_str();
  app.add_option("--max-bracket-steps", f.root.max_bracket_steps, "Bracket search cap")
      ->capture_default_str();
  app.add_option("--max-bracket-repairs", f.root.max_bracket_repairs,
                 "Restarts after a collapsed bisection")
      ->capture_default_str();
  app.add_flag("!--no-warm-start", f.root.warm_start, "Do not reuse the previous witness");
  app.add_option("--c-init", f.c_init, "Initial c0 (default n*M'^2*d/4)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--c-tol", f.c_tol, "Bisection width tolerance (default 1e-3*c_init)")
      ->check(CLI::NonNegativeNumber);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  return out;
}

// ---- generate --------------------------------------------------------------

struct GenerateArgs {
  GenerationSpec spec;
  std::string instance_path;
  std::string truth_path;
};

int run_generate(const GenerateArgs& a) {
  const TruthAndInstance data = generate_network(a.spec);
  {
    auto out = open_out(a.instance_path);
    write_instance(out, data.instance);
  }
  {
    auto out = open_out(a.truth_path);
    write_positions(out, data.truth);
  }
  std::cout.precision(10);
  std::cout << "density " << network_density(data.instance) << " edges "
            << data.instance.edge_count() << '\n';
  return kOk;
}

// ---- solve -----------------------------------------------------------------

struct SolveArgs {
  std::string instance_path;
  std::string out_path;
  std::string trace_prefix;
  SolverFlags solver;
};

int run_solve(const SolveArgs& a) {
  const NetworkInstance net = load_instance(a.instance_path);
  const BoxRegion box = default_box(net);
  RootFinder finder(net, box, a.solver.cfg, a.solver.root);
  finder.keep_solver_trace(!a.trace_prefix.empty());
  const double c_init =
      a.solver.c_init > 0.0 ? a.solver.c_init : RootFinder::default_c_init(net, box);
  const double c_tol = a.solver.c_tol > 0.0 ? a.solver.c_tol : 1e-3 * c_init;

  auto write_traces = [&] {
    if (a.trace_prefix.empty()) return;
    auto solver_out = open_out(a.trace_prefix + "_solver.csv");
    write_solver_trace_csv(solver_out, finder.last_solver_trace());
    auto root_out = open_out(a.trace_prefix + "_root.csv");
    write_root_trace_csv(root_out, finder.root_trace());
  };

  LocalizationResult r;
  try {
    r = finder.localize(c_init, c_tol);
  } catch (const NoBracketError&) {
    write_traces();
    throw;
  }
  write_traces();
  {
    auto out = open_out(a.out_path);
    write_positions(out, r.x_star);
  }
  std::cout.precision(10);
  std::cout << r.c0_star << ' ' << r.residual << ' ' << r.bisection_iterations << ' '
            << (r.feasibility.feasible ? "true" : "false") << '\n';
  if (!r.converged) {
    std::cerr << "netloc: root band not reached (residual " << r.residual << ")\n";
    return kNotConverged;
  }
  if (!r.feasibility.feasible) {
    std::cerr << "netloc: estimate violates the bounds by " << r.feasibility.max_relative_violation
              << " (relative)\n";
    return kInfeasible;
  }
  return kOk;
}

// ---- evaluate --------------------------------------------------------------

struct EvaluateArgs {
  std::string truth_path;
  std::string estimate_path;
  bool no_align = false;
  std::string svg_path;
  std::string scatter_path;
};

int run_evaluate(const EvaluateArgs& a) {
  const Configuration truth = load_positions(a.truth_path);
  const Configuration estimate = load_positions(a.estimate_path);
  if (truth.node_count() != estimate.node_count())
    throw ParseError("truth has " + std::to_string(truth.node_count()) + " nodes, estimate has " +
                     std::to_string(estimate.node_count()));
  const ErrorReport report =
      error_metrics(truth, estimate, a.no_align ? Alignment::None : Alignment::Rigid);
  std::cout.precision(10);
  std::cout << "mean_error " << report.mean_error << '\n'
            << "max_error " << report.max_error << '\n';
  for (std::size_t i = 0; i < report.per_node_offsets.size(); ++i)
    std::cout << "offset " << i + 1 << ' ' << report.per_node_offsets[i] << '\n';
  if (!a.scatter_path.empty()) {
    auto out = open_out(a.scatter_path);
    write_scatter_csv(out, truth, report);
  }
  if (!a.svg_path.empty()) {
    auto out = open_out(a.svg_path);
    write_scatter_svg(out, truth, report);
  }
  return kOk;
}

// ---- sweep -----------------------------------------------------------------

struct SweepArgs {
  SweepOptions opts;
  std::string out_path;
  SolverFlags solver;
};

int run_sweep(SweepArgs a) {
  a.opts.root = a.solver.root;
  const std::vector<SweepRow> rows = density_sweep(a.opts, a.solver.cfg);
  if (a.out_path.empty()) {
    write_sweep_csv(std::cout, rows);
  } else {
    auto out = open_out(a.out_path);
    write_sweep_csv(out, rows);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Localize sensor networks from noisy distance bounds"};
  app.require_subcommand(1);
  // One config file for all subcommands; each reads its own [section].
  app.set_config("--config", "", "INI/TOML file with [generate], [solve] or [sweep] sections");
  app.fallthrough();
  app.allow_config_extras(CLI::config_extras_mode::error);

  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand("generate", "Random network with ground truth");
  generate->add_option("--n", gen.spec.n, "Node count")->check(CLI::Range(2, 100000))
      ->capture_default_str();
  generate->add_option("--density", gen.spec.target_density, "Target density in (0, 1]")
      ->capture_default_str();
  generate->add_option("--noise", gen.spec.noise_fraction, "Noise as a fraction of the diagonal")
      ->capture_default_str();
  generate->add_option("--seed", gen.spec.rng_seed, "RNG seed")->capture_default_str();
  generate->add_option("--field-lower", gen.spec.field_lower)->capture_default_str();
  generate->add_option("--field-upper", gen.spec.field_upper)->capture_default_str();
  generate->add_option("--instance", gen.instance_path, "Instance file to write")->required();
  generate->add_option("--truth", gen.truth_path, "Ground-truth file to write")->required();

  SolveArgs solve_args;
  CLI::App* solve = app.add_subcommand("solve", "Localize an instance file");
  solve->add_option("instance", solve_args.instance_path, "Instance file")->required();
  solve->add_option("--out", solve_args.out_path, "Positions file to write")->required();
  solve->add_option("--trace", solve_args.trace_prefix,
                    "Write <prefix>_solver.csv and <prefix>_root.csv");
  solve->add_option("--seed", solve_args.solver.cfg.rng_seed, "Multistart seed")
      ->capture_default_str();
  add_solver_flags(*solve, solve_args.solver);

  EvaluateArgs eval;
  CLI::App* evaluate = app.add_subcommand("evaluate", "Compare an estimate with the truth");
  evaluate->add_option("truth", eval.truth_path, "Ground-truth positions")->required();
  evaluate->add_option("estimate", eval.estimate_path, "Estimated positions")->required();
  evaluate->add_flag("--no-align", eval.no_align, "Compare raw coordinates");
  evaluate->add_option("--svg", eval.svg_path, "Scatter plot to write");
  evaluate->add_option("--scatter", eval.scatter_path, "Scatter CSV to write");

  SweepArgs sweep_args;
  CLI::App* sweep = app.add_subcommand("sweep", "Error table over network densities");
  sweep->add_option("--densities", sweep_args.opts.densities, "Ascending densities")
      ->delimiter(',')
      ->required();
  sweep->add_option("--trials", sweep_args.opts.trials_per_density, "Trials per density")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sweep->add_option("--n", sweep_args.opts.n, "Nodes per network")->check(CLI::Range(2, 100000))
      ->capture_default_str();
  sweep->add_option("--noise", sweep_args.opts.noise_fraction)->capture_default_str();
  sweep->add_option("--seed", sweep_args.opts.rng_seed, "Network seed")->capture_default_str();
  sweep->add_option("--solver-seed", sweep_args.solver.cfg.rng_seed, "Multistart seed")
      ->capture_default_str();
  sweep->add_option("--jobs", sweep_args.opts.jobs, "Concurrent trials")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sweep->add_option("--out", sweep_args.out_path, "CSV file (default stdout)");
  add_solver_flags(*sweep, sweep_args.solver);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }

  try {
    if (*generate) return run_generate(gen);
    if (*solve) return run_solve(solve_args);
    if (*evaluate) return run_evaluate(eval);
    if (*sweep) return run_sweep(sweep_args);
  } catch (const ParameterError& e) {
    std::cerr << "netloc: " << e.what() << '\n';
    return kValidation;
  } catch (const ParseError& e) {
    std::cerr << "netloc: " << e.what() << '\n';
    return kParse;
  } catch (const NoBracketError& e) {
    std::cerr << "netloc: " << e.what() << '\n';
    return kNoBracket;
  } catch (const GenerationError& e) {
    std::cerr << "netloc: " << e.what() << '\n';
    return kGeneration;
  } catch (const std::exception& e) {
    std::cerr << "netloc: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
