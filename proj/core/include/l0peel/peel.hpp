#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "l0peel/dual.hpp"
#include "l0peel/instance.hpp"
#include "l0peel/relax.hpp"

namespace l0peel {

// Safe peeling.
//
// For a free index j and any dual point w (corr_j = a_j^T w, D = D(w)), the
// node problem restricted to the slab x_j > alpha is bounded below by
//
//   D + psi_upper_j + alpha [-corr_j]_+ ,
//
// and the slab x_j < -alpha by D + psi_lower_j + alpha [corr_j]_+. Whenever
// such a bound exceeds the incumbent value p_bar, the slab holds no point
// better than the incumbent and the box can be shrunk to exclude it without
// changing any pruning decision. Every test reuses the same (D, corr), so all
// coordinates are processed in O(n) once A^T w is known.

enum class PeelSide { Upper, Lower };

/// pivot(lambda, l_j, u_j, corr_j) - u_j [corr_j]_+ + lambda.
double psi_upper(Index j, double corr_j, const BoxBounds& bounds, double lambda);

/// pivot(lambda, l_j, u_j, corr_j) + l_j [-corr_j]_+ + lambda.
double psi_lower(Index j, double corr_j, const BoxBounds& bounds, double lambda);

/// New upper bound in [0, u_j) for free coordinate j, or nullopt when the
/// certificate does not fire.
///
/// corr_j >= 0: returns 0 iff D + psi > p_bar.
/// corr_j <  0: alpha_bar = (p_bar - D - psi) / (-corr_j); returns 0 when
/// alpha_bar < 0, alpha_bar + eps_alpha when that stays below u_j. The
/// returned value is always strictly above alpha_bar, also when eps_alpha is
/// absorbed by rounding.
std::optional<double> peel_upper(Index j, double corr_j, double D, double p_bar,
                                 const BoxBounds& bounds, double lambda, double eps_alpha);

/// Mirror of peel_upper(): new lower bound in (l_j, 0], or nullopt.
std::optional<double> peel_lower(Index j, double corr_j, double D, double p_bar,
                                 const BoxBounds& bounds, double lambda, double eps_alpha);

struct PeelEvent {
  Index j = 0;
  PeelSide side = PeelSide::Upper;
  double corr = 0.0;
  double D = 0.0;
  double psi = 0.0;
  double p_bar = 0.0;
  double old_bound = 0.0;
  double new_bound = 0.0;
};

struct PeelOutcome {
  BoxBounds bounds;
  int n_upper_peeled = 0;
  int n_lower_peeled = 0;
  std::vector<Index> implied_zero;  // free indices left with the box [0, 0]
  std::vector<PeelEvent> events;

  int fired() const { return n_upper_peeled + n_lower_peeled; }
};

/// Applies peel_upper and peel_lower to every free index with the same
/// (D, p_bar) and intersects the results. `corr` must be A^T w and `D` the
/// dual value at w under `bounds`.
PeelOutcome peel_all(const NodePartition& node, const Vector& corr, double D, double p_bar,
                     const BoxBounds& bounds, double lambda, double eps_alpha,
                     bool record_events = false);

/// CSV trace of fired peels, one row per event.
void write_peel_trace_header(std::ostream& out);
void write_peel_trace(std::ostream& out, std::size_t node_id, const std::vector<PeelEvent>& events);

}  // namespace l0peel
