#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "l0peel/instance.hpp"
#include "l0peel/peel.hpp"
#include "l0peel/relax.hpp"

namespace l0peel {

// Brute-force reference solvers. They enumerate supports and solve small
// least-squares problems directly; nothing here calls the coordinate-descent,
// dual or branch-and-bound code, so they can check those paths.

struct OracleResult {
  Vector x;
  double value = 0.0;
  std::vector<Index> support;
  std::size_t enumerated_count = 0;
  /// False when the best closed-form point has a zero on S1, i.e. the node
  /// infimum is approached but not attained.
  bool attained = true;
};

class OracleBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Number of supports of size <= max_support over n indices.
double count_supports(Index n, Index max_support);

/// Global optimum of the unconstrained ell0 problem over supports of size
/// <= max_support. Least-norm least squares on each support; exact zeros are
/// recounted. Ties go to the lexicographically smallest support.
OracleResult brute_force_global(const ProblemInstance& inst, Index max_support,
                                double budget = 1e6);

/// Extra half-line constraint x_j > alpha (Upper) or x_j < -alpha (Lower).
struct HalfLine {
  Index j = 0;
  PeelSide side = PeelSide::Upper;
  double alpha = 0.0;
};

/// Node value inf { P(x) : x_{S0} = 0, x_{S1} != 0, x in [l, u] [, half-line] }.
///
/// Enumerates supports S1 <= S <= S1 u free and solves the box-constrained
/// least-squares problem on each. The open constraints
/// x_{S1} != 0 and x_j > alpha are replaced by their closures (the strict
/// half-line by x_j >= alpha + 1e-12). Returns +inf when no support is feasible.
OracleResult brute_force_node(const ProblemInstance& inst, const NodePartition& node,
                              const BoxBounds& bounds,
                              const std::optional<HalfLine>& extra = std::nullopt,
                              double budget = 1e6);

/// min 1/2|y - B z|^2 over z in [lo, hi] by a primal active-set method,
/// with accelerated projected gradient as fallback. Exposed for tests.
Vector oracle_box_least_squares(const Matrix& B, const Vector& y, const Vector& lo,
                                const Vector& hi, double tol = 1e-10, int max_iter = 200000);

}  // namespace l0peel
