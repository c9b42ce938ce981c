#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "l0peel/instance.hpp"

namespace l0peel {

enum class VarState : std::uint8_t { Free, Zero, One };

/// Index partition of a branch-and-bound node: coordinates forced to zero,
/// forced nonzero, and free.
class NodePartition {
 public:
  NodePartition() = default;
  explicit NodePartition(Index n);

  /// Throws std::invalid_argument when the sets overlap or an index is out of range.
  static NodePartition from_sets(Index n, std::span<const Index> zeros, std::span<const Index> ones);

  Index size() const { return static_cast<Index>(states_.size()); }
  VarState state(Index i) const { return states_[static_cast<std::size_t>(i)]; }
  bool is_free(Index i) const { return state(i) == VarState::Free; }

  void fix_zero(Index i);
  void fix_one(Index i);

  std::vector<Index> zeros() const { return collect(VarState::Zero); }
  std::vector<Index> ones() const { return collect(VarState::One); }
  std::vector<Index> free() const { return collect(VarState::Free); }
  Index num_ones() const { return num_ones_; }
  Index num_free() const { return num_free_; }

  bool operator==(const NodePartition&) const = default;

 private:
  std::vector<Index> collect(VarState s) const;

  std::vector<VarState> states_;
  Index num_ones_ = 0;
  Index num_free_ = 0;
};

/// Value of the node relaxation
///   1/2 |y - Ax|^2 + lambda * sum_{free} ([x_i]_+ / u_i - [-x_i]_+ / l_i) + lambda |S1|
/// or +inf when x leaves the box or is nonzero on S0. Uses 0/0 = 0.
double relax_objective(const Vector& x, const NodePartition& node, const BoxBounds& bounds,
                       const ProblemInstance& inst);

/// Exact minimizer of the one-dimensional restriction
///   1/2 s t^2 - c t + penalty(t)   over t in [lower, upper],
/// where penalty is 0 on S1, lambda-scaled hinge on free coordinates, and
/// t = 0 is forced on S0.
double coordinate_update(VarState state, double c, double s, double lower, double upper,
                         double lambda);

struct RelaxationResult {
  Vector x_hat;
  double value = 0.0;  // relax_objective(x_hat) against the final bounds
  Vector w;            // y - A x_hat
  Vector corr;         // A^T w
  int iterations = 0;  // full sweeps
  bool converged = false;
  bool stopped = false;  // the hook asked to stop early
  int bound_updates = 0; // sweeps after which the hook shrank the bounds
  std::vector<double> trace;  // objective after each sweep (only when requested)
  std::vector<bool> trace_peeled;
};

struct HookResult {
  bool bounds_changed = false;
  bool stop = false;
};

/// Called after every sweep with the current dual point w = y - Ax and
/// corr = A^T w. May shrink `bounds` in place.
using PeelHook = std::function<HookResult(const Vector& w, const Vector& corr, BoxBounds& bounds)>;

struct RelaxOptions {
  double tol = 1e-8;
  int max_iter = 2000;
  int residual_refresh = 50;
  bool record_trace = false;
};

/// Cyclic coordinate descent on the node relaxation, S1 coordinates first,
/// then free coordinates, each in ascending order. Stops when the largest
/// coordinate move of a sweep is <= tol and the hook left the bounds alone.
///
/// `bounds` is read at every coordinate update and is updated in place by the
/// hook; the iterate is projected onto the new box whenever it shrinks.
RelaxationResult solve_relaxation(const ProblemInstance& inst, const NodePartition& node,
                                  BoxBounds& bounds, const RelaxOptions& options = {},
                                  std::span<const double> warm_start = {},
                                  const PeelHook& hook = {});

}  // namespace l0peel
