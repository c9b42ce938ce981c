#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "l0peel/bnb.hpp"
#include "l0peel/instance.hpp"
#include "l0peel/oracle.hpp"
#include "l0peel/sweep.hpp"

namespace {

using namespace l0peel;

struct Options {
  ExperimentConfig cfg;
  bool peel = true;
  std::string in;
  std::string out;
  std::string trace;
  double big_m = 0.0;
  std::string sweep_var = "gamma";
  std::vector<double> values{1.0, 2.0, 3.0, 5.0};
  int trials = 20;
  int max_support = -1;
  bool quiet = false;
};

void add_instance_flags(CLI::App& app, Options& o) {
  app.add_option("--m", o.cfg.m, "rows of A")->check(CLI::PositiveNumber);
  app.add_option("--n", o.cfg.n, "columns of A")->check(CLI::PositiveNumber);
  app.add_option("--k", o.cfg.k, "support size of the ground truth")->check(CLI::NonNegativeNumber);
  app.add_option("--rho", o.cfg.rho, "column correlation, K_ij = rho^|i-j|")
      ->check(CLI::Range(0.0, 0.999999));
  app.add_option("--snr", o.cfg.snr_db, "signal-to-noise ratio in dB (inf for noiseless)");
  app.add_option("--sigma", o.cfg.sigma, "spread of the nonzero amplitudes")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--lambda", o.cfg.lambda, "regularization weight (default: from noise level)");
  app.add_option("--lambda-factor", o.cfg.lambda_factor,
                 "lambda = factor * noise variance * log(n) when --lambda is unset");
  app.add_option("--seed", o.cfg.seed, "random seed");
}

void add_solver_flags(CLI::App& app, Options& o) {
  app.add_option("--gamma", o.cfg.gamma, "Big-M margin factor (>= 1)")->check(CLI::Range(1.0, 1e12));
  app.add_option("--big-m", o.big_m, "use this Big-M instead of calibrating");
  app.add_flag("--peel,!--no-peel", o.peel, "enable safe peeling (default on)");
  app.add_option("--tol", o.cfg.solver.relax_tol, "relaxation stopping tolerance");
  app.add_option("--max-nodes", o.cfg.solver.max_nodes, "node budget");
  app.add_option("--time-limit", o.cfg.solver.time_limit_s, "time budget in seconds");
}

ProblemInstance instance_from(const Options& o, std::optional<GroundTruth>& truth) {
  if (!o.in.empty()) {
    LoadedInstance loaded = load_instance(o.in);
    truth = loaded.truth;
    return std::move(loaded.instance);
  }
  Trial t = make_trial(o.cfg, o.cfg.seed);
  truth = t.truth;
  return std::move(t.instance);
}

void print_vector(std::ostream& out, const Vector& x) {
  for (Index i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) out << "  x[" << i << "] = " << format_double(x[i]) << '\n';
  }
}

int run_generate(const Options& o) {
  Trial t = make_trial(o.cfg, o.cfg.seed);
  if (o.out.empty()) {
    write_instance(std::cout, t.instance, &t.truth);
  } else {
    save_instance(o.out, t.instance, &t.truth);
    std::cerr << "wrote " << o.out << " (m=" << t.instance.m() << ", n=" << t.instance.n()
              << ", lambda=" << format_double(t.instance.lambda()) << ")\n";
  }
  return 0;
}

int run_solve(const Options& o) {
  std::optional<GroundTruth> truth;
  const ProblemInstance inst = instance_from(o, truth);

  SolverConfig sc = o.cfg.solver;
  sc.peeling = o.peel;

  double M = o.big_m;
  if (!(M > 0.0)) {
    double M0 = truth ? truth->x_dagger.cwiseAbs().maxCoeff() : 0.0;
    if (!(M0 > 0.0)) M0 = 1.0;
    M = calibrate_with_solver(inst, o.cfg.gamma, o.cfg.eta, M0, sc).M;
  }

  std::ofstream trace_file;
  std::ostream* trace = nullptr;
  if (!o.trace.empty()) {
    trace_file.open(o.trace);
    if (!trace_file) throw std::runtime_error("cannot open " + o.trace);
    trace = &trace_file;
  }

  const SolveReport rep = solve(inst, BoxBounds::big_m(inst.n(), M), sc, {}, trace);

  std::cout << "status     " << to_string(rep.status) << '\n'
            << "p_star     " << format_double(rep.p_star) << '\n'
            << "big_m      " << format_double(M) << '\n'
            << "nodes      " << rep.node_count << '\n'
            << "peels      " << rep.peel_fire_count << '\n'
            << "sweeps     " << rep.sweep_count << '\n'
            << "wall_ms    " << rep.wall_time.count() * 1e3 << '\n'
            << "support   ";
  for (Index i : support_of(rep.x_star)) std::cout << ' ' << i;
  std::cout << '\n';
  if (!o.quiet) print_vector(std::cout, rep.x_star);

  if (!o.out.empty()) {
    std::ofstream csv(o.out);
    if (!csv) throw std::runtime_error("cannot open " + o.out);
    csv << solve_report_csv_header() << '\n'
        << solve_report_csv_row(rep, o.in.empty() ? "seed" + std::to_string(o.cfg.seed) : o.in,
                                o.peel ? "peel" : "nopeel")
        << '\n';
  }
  return rep.valid ? 0 : 3;
}

int run_oracle(const Options& o) {
  std::optional<GroundTruth> truth;
  const ProblemInstance inst = instance_from(o, truth);
  const Index max_support = o.max_support < 0 ? inst.n() : o.max_support;
  const OracleResult r = brute_force_global(inst, max_support);
  std::cout << "p_star     " << format_double(r.value) << '\n'
            << "supports   " << r.enumerated_count << '\n'
            << "support   ";
  for (Index i : r.support) std::cout << ' ' << i;
  std::cout << '\n';
  if (!o.quiet) print_vector(std::cout, r.x);
  return 0;
}

int run_sweep_cmd(const Options& o) {
  if (o.out.empty()) throw std::invalid_argument("sweep needs --out");
  SweepSpec spec;
  spec.base = o.cfg;
  spec.variable = parse_sweep_variable(o.sweep_var);
  spec.values = o.values;
  spec.trials = o.trials;

  auto progress = [&](const SweepRow& r) {
    if (o.quiet) return;
    std::cerr << o.sweep_var << '=' << format_double(r.value) << " trial " << r.trial << ' '
              << r.variant << ": nodes " << r.node_count << ", peels " << r.peel_fire_count
              << ", " << to_string(r.status) << '\n';
  };
  const SweepResult result = run_sweep(spec, std::filesystem::path(o.out), progress);

  write_sweep_summary(std::cout, spec, result);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Branch-and-bound for l0-regularized least squares with safe peeling"};
  app.require_subcommand(1);

  Options o;

  auto* gen = app.add_subcommand("generate", "draw a synthetic instance and write it to a file");
  add_instance_flags(*gen, o);
  gen->add_option("--out", o.out, "instance file (stdout if omitted)");

  auto* sol = app.add_subcommand("solve", "solve an instance by branch-and-bound");
  add_instance_flags(*sol, o);
  add_solver_flags(*sol, o);
  sol->add_option("--in", o.in, "instance file (otherwise generated from the flags)");
  sol->add_option("--out", o.out, "write a one-row CSV report here");
  sol->add_option("--trace", o.trace, "write one CSV row per peeling event here");
  sol->add_flag("--quiet", o.quiet, "omit the solution vector");

  auto* orc = app.add_subcommand("oracle", "brute-force enumeration over all supports (small n)");
  add_instance_flags(*orc, o);
  orc->add_option("--in", o.in, "instance file (otherwise generated from the flags)");
  orc->add_option("--max-support", o.max_support, "largest support size to enumerate");
  orc->add_flag("--quiet", o.quiet, "omit the solution vector");

  auto* swp = app.add_subcommand("sweep", "node count and time of solver variants over a grid");
  add_instance_flags(*swp, o);
  add_solver_flags(*swp, o);
  swp->add_option("--var", o.sweep_var, "swept variable: gamma, sigma, rho or k");
  swp->add_option("--values", o.values, "values of the swept variable")->delimiter(',');
  swp->add_option("--trials", o.trials, "instances per value")->check(CLI::PositiveNumber);
  swp->add_option("--out", o.out, "raw CSV; _summary.csv and _timing.csv are written alongside")
      ->required();
  swp->add_flag("--quiet", o.quiet, "no per-solve progress on stderr");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return run_generate(o);
    if (sol->parsed()) return run_solve(o);
    if (orc->parsed()) return run_oracle(o);
    if (swp->parsed()) return run_sweep_cmd(o);
  } catch (const SafetyViolation& e) {
    std::cerr << "safety violation: " << e.what() << "\nreproduce with --seed " << e.seed()
              << " on the failing point\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
