#pragma once

#include <cstdint>
#include <limits>

namespace l0peel {

enum class BranchingRule {
  LargestMagnitude,  // argmax |x_hat_j| over free coordinates, ties to smallest index
  SmallestIndex,
};

/// Knobs of the branch-and-bound solver.
struct SolverConfig {
  bool peeling = true;
  /// Additive slack on the peeling threshold; see peel_upper().
  double eps_alpha = 1e-16;
  /// Absolute margin used by prune_test() and by the peeling certificates.
  double eps_prune = 1e-10;
  /// A node whose lower bound is within this margin of the incumbent is closed
  /// instead of branched.
  double eps_close = 1e-9;

  double relax_tol = 1e-8;
  int relax_max_iter = 2000;
  int residual_refresh = 50;

  /// Support threshold when rounding a relaxed point to an incumbent candidate.
  double tau_supp = 1e-8;
  double ls_tol = 1e-10;

  BranchingRule branching = BranchingRule::LargestMagnitude;

  std::int64_t max_nodes = std::numeric_limits<std::int64_t>::max();
  double time_limit_s = std::numeric_limits<double>::infinity();
};

/// One synthetic experiment point: data generation, Big-M slack and solver flags.
struct ExperimentConfig {
  int m = 30;
  int n = 40;
  int k = 3;
  double rho = 0.1;
  double snr_db = 15.0;
  double sigma = 1.0;
  double gamma = 1.0;
  std::uint64_t seed = 0;

  /// Direct ell0 weight. When <= 0, lambda is set from the realized noise
  /// level as lambda_factor * (|eps|^2 / m) * log(n).
  double lambda = 0.0;
  double lambda_factor = 2.0;

  /// Geometric growth factor of the Big-M search.
  double eta = 1.1;

  SolverConfig solver;
};

}  // namespace l0peel
