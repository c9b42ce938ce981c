#include "l0peel/sweep.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>

namespace l0peel {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string join_support(const std::vector<Index>& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(s[i]);
  }
  return out;
}

double mean(double sum, int count) { return count > 0 ? sum / count : 0.0; }

}  // namespace

SweepVariable parse_sweep_variable(std::string_view name) {
  if (name == "gamma") return SweepVariable::Gamma;
  if (name == "sigma") return SweepVariable::Sigma;
  if (name == "rho") return SweepVariable::Rho;
  if (name == "k") return SweepVariable::K;
  throw std::invalid_argument("unknown sweep variable '" + std::string(name) +
                              "' (expected gamma, sigma, rho or k)");
}

const char* to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::Gamma:
      return "gamma";
    case SweepVariable::Sigma:
      return "sigma";
    case SweepVariable::Rho:
      return "rho";
    case SweepVariable::K:
      return "k";
  }
  return "?";
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t value_index, int trial) {
  std::uint64_t h = splitmix64(base_seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(value_index));
  return splitmix64(h ^ static_cast<std::uint64_t>(trial));
}

ExperimentConfig apply_sweep_value(const ExperimentConfig& base, SweepVariable variable,
                                   double value) {
  ExperimentConfig cfg = base;
  switch (variable) {
    case SweepVariable::Gamma:
      cfg.gamma = value;
      break;
    case SweepVariable::Sigma:
      cfg.sigma = value;
      break;
    case SweepVariable::Rho:
      cfg.rho = value;
      break;
    case SweepVariable::K:
      cfg.k = static_cast<int>(std::lround(value));
      break;
  }
  return cfg;
}

Trial make_trial(const ExperimentConfig& config, std::uint64_t seed) {
  if (config.k > config.n) throw std::invalid_argument("make_trial: k must not exceed n");
  if (!(config.gamma >= 1.0)) throw std::invalid_argument("make_trial: gamma must be >= 1");
  Rng rng(seed);
  Matrix A = generate_dictionary(config.m, config.n, config.rho, rng);
  GroundTruth truth = generate_ground_truth(config.n, config.k, config.sigma, rng);
  truth.snr_db = config.snr_db;
  Vector y = generate_observation(A, truth.x_dagger, config.snr_db, rng);

  double lambda = config.lambda;
  if (!(lambda > 0.0)) {
    const double noise_var = (y - A * truth.x_dagger).squaredNorm() / static_cast<double>(config.m);
    lambda = config.lambda_factor * noise_var * std::log(static_cast<double>(config.n));
    if (!(lambda > 0.0)) {
      throw std::invalid_argument("make_trial: noiseless data needs an explicit lambda");
    }
  }
  return Trial{ProblemInstance(std::move(y), std::move(A), lambda), std::move(truth)};
}

BigMCalibration calibrate_with_solver(const ProblemInstance& inst, double gamma, double eta,
                                      double M0, const SolverConfig& config) {
  SolverConfig cfg = config;
  cfg.peeling = true;
  auto solver = [&cfg](const ProblemInstance& p, const BoxBounds& box) -> Vector {
    SolveReport r = solve(p, box, cfg);
    if (!r.valid) throw CalibrationError("calibrate_with_solver: solver budget exhausted");
    return r.x_star;
  };
  return calibrate_big_m(inst, gamma, eta, M0, solver);
}

SweepResult run_sweep(const SweepSpec& spec, const SweepProgress& progress) {
  if (spec.values.empty()) throw std::invalid_argument("run_sweep: no sweep values");
  if (spec.trials < 1) throw std::invalid_argument("run_sweep: trials must be >= 1");
  if (spec.variants.empty()) throw std::invalid_argument("run_sweep: no solver variants");

  SweepResult result;
  const std::size_t nv = spec.variants.size();
  for (std::size_t vi = 0; vi < spec.values.size(); ++vi) {
    const double value = spec.values[vi];
    const ExperimentConfig cfg = apply_sweep_value(spec.base, spec.variable, value);

    SweepSummaryRow summary;
    summary.value = value;
    std::vector<double> nodes(nv, 0.0), peels(nv, 0.0), times(nv, 0.0);

    for (int t = 0; t < spec.trials; ++t) {
      const std::uint64_t seed = trial_seed(spec.base.seed, vi, t);
      const Trial trial = make_trial(cfg, seed);
      const ProblemInstance& inst = trial.instance;

      double M0 = trial.truth.x_dagger.cwiseAbs().maxCoeff();
      if (!(M0 > 0.0)) M0 = 1.0;
      std::optional<BigMCalibration> cal;
      try {
        cal = calibrate_with_solver(inst, cfg.gamma, cfg.eta, M0, cfg.solver);
      } catch (const CalibrationError&) {
        // no certified box: every variant of this trial is reported as out of budget
        for (std::size_t v = 0; v < nv; ++v) {
          SweepRow row;
          row.value = value;
          row.trial = t;
          row.seed = seed;
          row.variant = spec.variants[v].name;
          row.lambda = inst.lambda();
          row.big_m = std::numeric_limits<double>::quiet_NaN();
          row.p_star = std::numeric_limits<double>::quiet_NaN();
          row.status = SolveStatus::BudgetExhausted;
          if (progress) progress(row);
          result.rows.push_back(std::move(row));
        }
        continue;
      }
      const BoxBounds box = BoxBounds::big_m(inst.n(), cal->M);

      double reference = 0.0;
      for (std::size_t v = 0; v < nv; ++v) {
        SolverConfig sc = cfg.solver;
        sc.peeling = spec.variants[v].peeling;
        const SolveReport rep = solve(inst, box, sc);

        SweepRow row;
        row.value = value;
        row.trial = t;
        row.seed = seed;
        row.variant = spec.variants[v].name;
        row.lambda = inst.lambda();
        row.big_m = cal->M;
        row.p_star = rep.p_star;
        row.support = support_of(rep.x_star);
        row.node_count = rep.node_count;
        row.peel_fire_count = rep.peel_fire_count;
        row.sweep_count = rep.sweep_count;
        row.status = rep.status;
        row.wall_time_ms = rep.wall_time.count() * 1e3;

        if (v == 0) {
          reference = rep.p_star;
        } else if (rep.valid && result.rows.back().status == SolveStatus::Optimal &&
                   std::abs(rep.p_star - reference) > 1e-8) {
          throw SafetyViolation("variants disagree on p_star (" + format_double(reference) +
                                    " vs " + format_double(rep.p_star) + ") at " +
                                    to_string(spec.variable) + "=" + format_double(value) +
                                    ", trial " + std::to_string(t) + ", seed " +
                                    std::to_string(seed),
                                seed);
        }

        nodes[v] += static_cast<double>(row.node_count);
        peels[v] += static_cast<double>(row.peel_fire_count);
        times[v] += row.wall_time_ms;
        if (progress) progress(row);
        result.rows.push_back(std::move(row));
      }
    }

    for (std::size_t v = 0; v < nv; ++v) {
      summary.mean_nodes.push_back(mean(nodes[v], spec.trials));
      summary.mean_peels.push_back(mean(peels[v], spec.trials));
      summary.mean_time_ms.push_back(mean(times[v], spec.trials));
    }
    for (std::size_t v = 0; v < nv; ++v) {
      summary.node_gain.push_back(summary.mean_nodes[0] / summary.mean_nodes[v]);
      summary.time_gain.push_back(summary.mean_time_ms[v] > 0.0
                                      ? summary.mean_time_ms[0] / summary.mean_time_ms[v]
                                      : 1.0);
    }
    result.summary.push_back(std::move(summary));
  }
  return result;
}

void write_sweep_rows(std::ostream& out, const SweepSpec& spec, const SweepResult& result) {
  out << to_string(spec.variable)
      << ",trial,seed,variant,lambda,big_m,p_star,support,node_count,peel_fire_count,"
         "sweeps,status\n";
  for (const auto& r : result.rows) {
    out << format_double(r.value) << ',' << r.trial << ',' << r.seed << ',' << r.variant << ','
        << format_double(r.lambda) << ',' << format_double(r.big_m) << ','
        << format_double(r.p_star) << ',' << join_support(r.support) << ',' << r.node_count << ','
        << r.peel_fire_count << ',' << r.sweep_count << ',' << to_string(r.status) << '\n';
  }
}

void write_sweep_summary(std::ostream& out, const SweepSpec& spec, const SweepResult& result) {
  out << to_string(spec.variable);
  for (const auto& v : spec.variants) out << ",nodes_" << v.name;
  for (const auto& v : spec.variants) out << ",peels_" << v.name;
  for (std::size_t v = 1; v < spec.variants.size(); ++v) out << ",node_gain_" << spec.variants[v].name;
  out << '\n';
  for (const auto& s : result.summary) {
    out << format_double(s.value);
    for (double x : s.mean_nodes) out << ',' << format_double(x);
    for (double x : s.mean_peels) out << ',' << format_double(x);
    for (std::size_t v = 1; v < s.node_gain.size(); ++v) out << ',' << format_double(s.node_gain[v]);
    out << '\n';
  }
}

void write_sweep_timing(std::ostream& out, const SweepSpec& spec, const SweepResult& result) {
  out << to_string(spec.variable) << ",trial,variant,wall_time_ms\n";
  for (const auto& r : result.rows) {
    out << format_double(r.value) << ',' << r.trial << ',' << r.variant << ','
        << format_double(r.wall_time_ms) << '\n';
  }
  out << '\n' << to_string(spec.variable);
  for (const auto& v : spec.variants) out << ",time_ms_" << v.name;
  for (std::size_t v = 1; v < spec.variants.size(); ++v) out << ",time_gain_" << spec.variants[v].name;
  out << '\n';
  for (const auto& s : result.summary) {
    out << format_double(s.value);
    for (double x : s.mean_time_ms) out << ',' << format_double(x);
    for (std::size_t v = 1; v < s.time_gain.size(); ++v) out << ',' << format_double(s.time_gain[v]);
    out << '\n';
  }
}

std::filesystem::path summary_path(const std::filesystem::path& out) {
  auto p = out;
  p.replace_filename(out.stem().string() + "_summary.csv");
  return p;
}

std::filesystem::path timing_path(const std::filesystem::path& out) {
  auto p = out;
  p.replace_filename(out.stem().string() + "_timing.csv");
  return p;
}

void write_sweep(const SweepSpec& spec, const SweepResult& result,
                 const std::filesystem::path& out) {
  auto open = [](const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + p.string() + " for writing");
    return f;
  };
  {
    auto f = open(out);
    write_sweep_rows(f, spec, result);
  }
  {
    auto f = open(summary_path(out));
    write_sweep_summary(f, spec, result);
  }
  {
    auto f = open(timing_path(out));
    write_sweep_timing(f, spec, result);
  }
}

SweepResult run_sweep(const SweepSpec& spec, const std::filesystem::path& out,
                      const SweepProgress& progress) {
  SweepResult result = run_sweep(spec, progress);
  write_sweep(spec, result, out);
  return result;
}

}  // namespace l0peel
