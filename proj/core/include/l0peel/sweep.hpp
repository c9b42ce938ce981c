#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "l0peel/bnb.hpp"
#include "l0peel/config.hpp"
#include "l0peel/instance.hpp"

namespace l0peel {

enum class SweepVariable { Gamma, Sigma, Rho, K };

/// Throws std::invalid_argument for anything but gamma, sigma, rho or k.
SweepVariable parse_sweep_variable(std::string_view name);
const char* to_string(SweepVariable v);

struct SolverVariant {
  std::string name;
  bool peeling = true;
};

struct SweepSpec {
  ExperimentConfig base;
  SweepVariable variable = SweepVariable::Gamma;
  std::vector<double> values;
  int trials = 1;
  /// The first variant is the reference for the gain columns.
  std::vector<SolverVariant> variants{{"nopeel", false}, {"peel", true}};
};

/// A generated synthetic instance together with its ground truth.
struct Trial {
  ProblemInstance instance;
  GroundTruth truth;
};

/// Draws A, x_dagger and y from `config` using a generator seeded with `seed`,
/// then fixes lambda (see ExperimentConfig::lambda).
Trial make_trial(const ExperimentConfig& config, std::uint64_t seed);

/// Seed of trial `trial` at sweep point `value_index`.
std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t value_index, int trial);

/// Applies one sweep value to a copy of `base`.
ExperimentConfig apply_sweep_value(const ExperimentConfig& base, SweepVariable variable, double value);

/// Big-M calibration backed by the branch-and-bound solver (peeling on).
BigMCalibration calibrate_with_solver(const ProblemInstance& inst, double gamma, double eta,
                                      double M0, const SolverConfig& config);

struct SweepRow {
  double value = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  std::string variant;
  double lambda = 0.0;
  double big_m = 0.0;
  double p_star = 0.0;
  std::vector<Index> support;
  std::int64_t node_count = 0;
  std::int64_t peel_fire_count = 0;
  std::int64_t sweep_count = 0;
  SolveStatus status = SolveStatus::Optimal;
  double wall_time_ms = 0.0;
};

struct SweepSummaryRow {
  double value = 0.0;
  std::vector<double> mean_nodes;  // per variant
  std::vector<double> mean_peels;
  std::vector<double> mean_time_ms;
  std::vector<double> node_gain;   // mean_nodes[0] / mean_nodes[v]
  std::vector<double> time_gain;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<SweepSummaryRow> summary;
};

/// Raised when two variants of the same trial disagree on p_star.
class SafetyViolation : public std::runtime_error {
 public:
  SafetyViolation(const std::string& what, std::uint64_t seed)
      : std::runtime_error(what), seed_(seed) {}
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

using SweepProgress = std::function<void(const SweepRow&)>;

/// For each value x trial: generate, calibrate Big-M once, solve with every
/// variant on that same box. Solver budget exhaustion is recorded per row.
SweepResult run_sweep(const SweepSpec& spec, const SweepProgress& progress = {});

/// Writes `out` (one row per solve), `<stem>_summary.csv` (per-value means and
/// node gains) and `<stem>_timing.csv` (wall times). The first two files carry
/// no timing and are byte-identical across runs with the same spec.
void write_sweep(const SweepSpec& spec, const SweepResult& result, const std::filesystem::path& out);

SweepResult run_sweep(const SweepSpec& spec, const std::filesystem::path& out,
                      const SweepProgress& progress = {});

void write_sweep_rows(std::ostream& out, const SweepSpec& spec, const SweepResult& result);
void write_sweep_summary(std::ostream& out, const SweepSpec& spec, const SweepResult& result);
void write_sweep_timing(std::ostream& out, const SweepSpec& spec, const SweepResult& result);

std::filesystem::path summary_path(const std::filesystem::path& out);
std::filesystem::path timing_path(const std::filesystem::path& out);

}  // namespace l0peel
