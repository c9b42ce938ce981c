#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "l0peel/config.hpp"
#include "l0peel/instance.hpp"
#include "l0peel/peel.hpp"
#include "l0peel/relax.hpp"

namespace l0peel {

struct BnbNode {
  NodePartition partition;
  BoxBounds bounds;  // inherited from the parent, then peeled
  Vector warm_start;
  int depth = 0;
  std::optional<std::size_t> parent;
};

struct Incumbent {
  Vector x_best;
  double p_bar = std::numeric_limits<double>::infinity();
};

enum class SolveStatus { Optimal, BudgetExhausted };

const char* to_string(SolveStatus status);

struct SolveReport {
  Vector x_star;
  double p_star = 0.0;
  std::int64_t node_count = 0;
  std::int64_t peel_fire_count = 0;
  std::int64_t pruned_count = 0;
  std::int64_t closed_count = 0;
  std::int64_t leaf_count = 0;
  std::int64_t sweep_count = 0;
  int max_depth = 0;
  std::chrono::duration<double> wall_time{0.0};
  SolveStatus status = SolveStatus::Optimal;
  /// True when x_star is certified optimal (the tree was exhausted).
  bool valid = true;
};

/// How a node left the tree.
enum class NodeOutcome { Pruned, Closed, Leaf, Branched };

/// Snapshot handed to a SolveObserver after each node is processed.
struct NodeRecord {
  std::size_t id = 0;
  std::optional<std::size_t> parent;
  int depth = 0;
  const NodePartition* partition = nullptr;
  const BoxBounds* input_bounds = nullptr;  // as inherited
  const BoxBounds* final_bounds = nullptr;  // after peeling
  double lower_bound = 0.0;
  double p_bar_before = 0.0;  // incumbent when the node was entered
  double p_bar_after = 0.0;
  int peels = 0;
  NodeOutcome outcome = NodeOutcome::Branched;
};

using SolveObserver = std::function<void(const NodeRecord&)>;

/// lower_bound > p_bar + eps_prune. Ties never prune.
inline bool prune_test(double lower_bound, double p_bar, double eps_prune) {
  return lower_bound > p_bar + eps_prune;
}

/// Splits `node` on the free index selected by `rule` (largest |x_hat_j|,
/// ties to the smallest index). Returns {zero child, one child}; the zero
/// child's box slot is [0, 0]. Throws std::logic_error when nothing is free.
std::pair<BnbNode, BnbNode> branch(const BnbNode& node, const Vector& x_hat,
                                   BranchingRule rule = BranchingRule::LargestMagnitude);

/// Index branch() would split on.
Index branching_index(const NodePartition& partition, const BoxBounds& bounds, const Vector& x_hat,
                      BranchingRule rule);

/// Rounds x_hat to the support {|x_hat_i| > tau} u S1, solves least squares
/// on that support inside `bounds`, and keeps the candidate iff its objective
/// is strictly below incumbent.p_bar.
Incumbent update_incumbent(const Vector& x_hat, const NodePartition& node, const BoxBounds& bounds,
                           const ProblemInstance& inst, Incumbent incumbent, double tau = 1e-8,
                           double ls_tol = 1e-10);

/// Depth-first branch-and-bound with optional safe peeling inside the node
/// relaxations. `root_bounds` must contain every global minimizer.
SolveReport solve(const ProblemInstance& inst, const BoxBounds& root_bounds,
                  const SolverConfig& config = {}, const SolveObserver& observer = {},
                  std::ostream* peel_trace = nullptr);

/// Support of x (indices of nonzero entries).
std::vector<Index> support_of(const Vector& x);

/// Box-constrained least squares restricted to `support`; other entries are 0.
Vector restricted_least_squares(const ProblemInstance& inst, const std::vector<Index>& support,
                                const BoxBounds& bounds, double tol = 1e-10);

/// "instance,flags,p_star,node_count,peel_fire_count,wall_time_ms,status"
std::string solve_report_csv_header();
std::string solve_report_csv_row(const SolveReport& report, const std::string& instance_id,
                                 const std::string& flags);

}  // namespace l0peel
