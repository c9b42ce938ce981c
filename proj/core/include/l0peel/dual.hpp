#pragma once

#include <algorithm>

#include "l0peel/instance.hpp"
#include "l0peel/relax.hpp"

namespace l0peel {

inline double positive_part(double v) { return std::max(v, 0.0); }

/// Two-hinge function [u v - rho]_+ + [l v - rho]_+.
inline double pivot(double rho, double lower, double upper, double v) {
  return positive_part(upper * v - rho) + positive_part(lower * v - rho);
}

/// Convex conjugate of x -> b + indicator(x in [l, u]):  u[v]_+ - l[-v]_+ - b.
inline double conjugate_box_const(double b, double lower, double upper, double v) {
  return upper * positive_part(v) - lower * positive_part(-v) - b;
}

/// Convex conjugate of x -> indicator(x in [l, u]) + (a/u)[x]_+ - (a/l)[-x]_+
/// with l <= 0 <= u, a >= 0 and 0/0 = 0:  [u v - a]_+ + [l v - a]_+.
inline double conjugate_box_linear(double a, double lower, double upper, double v) {
  return pivot(a, lower, upper, v);
}

struct DualEvaluation {
  Vector w;
  double value = 0.0;
  Vector corr;  // A^T w
};

/// Fenchel dual objective of the node relaxation,
///
///   D(w) = 1/2|y|^2 - 1/2|y - w|^2 + lambda|S1|
///          - sum_{S1} pivot(0, l_i, u_i, a_i^T w) - sum_{free} pivot(lambda, l_i, u_i, a_i^T w).
///
/// `corr` must equal A^T w. Any w gives a lower bound on the relaxation value.
/// Costs O(n + m).
double dual_value(const Vector& w, const Vector& corr, const NodePartition& node,
                  const BoxBounds& bounds, const ProblemInstance& inst);

/// Same as dual_value() but computes corr = A^T w.
DualEvaluation dual_objective(const Vector& w, const NodePartition& node, const BoxBounds& bounds,
                              const ProblemInstance& inst);

}  // namespace l0peel
