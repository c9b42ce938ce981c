#include "l0peel/relax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace l0peel {

NodePartition::NodePartition(Index n)
    : states_(static_cast<std::size_t>(n), VarState::Free), num_free_(n) {}

NodePartition NodePartition::from_sets(Index n, std::span<const Index> zeros,
                                       std::span<const Index> ones) {
  NodePartition node(n);
  auto check = [n](Index i) {
    if (i < 0 || i >= n) throw std::invalid_argument("NodePartition: index out of range");
  };
  for (Index i : zeros) {
    check(i);
    if (!node.is_free(i)) throw std::invalid_argument("NodePartition: repeated index");
    node.fix_zero(i);
  }
  for (Index i : ones) {
    check(i);
    if (!node.is_free(i)) throw std::invalid_argument("NodePartition: S0 and S1 overlap");
    node.fix_one(i);
  }
  return node;
}

void NodePartition::fix_zero(Index i) {
  if (!is_free(i)) throw std::logic_error("NodePartition::fix_zero on a fixed index");
  states_[static_cast<std::size_t>(i)] = VarState::Zero;
  --num_free_;
}

void NodePartition::fix_one(Index i) {
  if (!is_free(i)) throw std::logic_error("NodePartition::fix_one on a fixed index");
  states_[static_cast<std::size_t>(i)] = VarState::One;
  --num_free_;
  ++num_ones_;
}

std::vector<Index> NodePartition::collect(VarState s) const {
  std::vector<Index> out;
  for (std::size_t i = 0; i < states_.size(); ++i) {
    if (states_[i] == s) out.push_back(static_cast<Index>(i));
  }
  return out;
}

namespace {

// a / b with 0/0 = 0.
inline double ratio(double a, double b) { return a == 0.0 ? 0.0 : a / b; }

inline double clip(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

// Minimizer of 1/2 s t^2 - g t over [lo, hi] with lo <= 0 <= hi, where g is
// the slope already net of the linear penalty of that side.
inline double quadratic_step(double g, double s, double lo, double hi) {
  if (s > 0.0) return clip(g / s, lo, hi);
  if (g > 0.0) return hi;
  if (g < 0.0) return lo;
  return 0.0;
}

}  // namespace

double relax_objective(const Vector& x, const NodePartition& node, const BoxBounds& bounds,
                       const ProblemInstance& inst) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const Index n = inst.n();
  if (x.size() != n) throw std::invalid_argument("relax_objective: x has wrong length");
  double penalty = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double xi = x[i];
    if (xi < bounds.lower[i] || xi > bounds.upper[i]) return inf;
    switch (node.state(i)) {
      case VarState::Zero:
        if (xi != 0.0) return inf;
        break;
      case VarState::One:
        break;
      case VarState::Free:
        penalty += ratio(std::max(xi, 0.0), bounds.upper[i]) -
                   ratio(std::max(-xi, 0.0), bounds.lower[i]);
        break;
    }
  }
  const double lambda = inst.lambda();
  return 0.5 * (inst.y() - inst.A() * x).squaredNorm() + lambda * penalty +
         lambda * static_cast<double>(node.num_ones());
}

double coordinate_update(VarState state, double c, double s, double lower, double upper,
                         double lambda) {
  switch (state) {
    case VarState::Zero:
      return 0.0;
    case VarState::One:
      return quadratic_step(c, s, lower, upper);
    case VarState::Free:
      break;
  }
  // Free coordinate: slope lambda/u on the positive side, lambda/(-l) on the
  // negative side. A zero-width side is unavailable.
  if (upper > 0.0) {
    const double g = c - lambda / upper;
    if (g > 0.0) return quadratic_step(g, s, 0.0, upper);
  }
  if (lower < 0.0) {
    const double g = c + lambda / (-lower);
    if (g < 0.0) return quadratic_step(g, s, lower, 0.0);
  }
  return 0.0;
}

RelaxationResult solve_relaxation(const ProblemInstance& inst, const NodePartition& node,
                                  BoxBounds& bounds, const RelaxOptions& options,
                                  std::span<const double> warm_start, const PeelHook& hook) {
  const Index n = inst.n();
  const Matrix& A = inst.A();
  const Vector& y = inst.y();
  const Vector& sq = inst.column_sq_norms();
  const double lambda = inst.lambda();

  if (node.size() != n || bounds.size() != n) {
    throw std::invalid_argument("solve_relaxation: dimension mismatch");
  }
  if (!warm_start.empty() && static_cast<Index>(warm_start.size()) != n) {
    throw std::invalid_argument("solve_relaxation: warm start has wrong length");
  }

  RelaxationResult out;
  Vector& x = out.x_hat;
  x = Vector::Zero(n);

  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) {
    if (node.state(j) == VarState::One) order.push_back(j);
  }
  for (Index j = 0; j < n; ++j) {
    if (node.state(j) == VarState::Free) order.push_back(j);
  }

  auto project = [&](Index j) {
    x[j] = node.state(j) == VarState::Zero ? 0.0 : clip(x[j], bounds.lower[j], bounds.upper[j]);
  };
  if (!warm_start.empty()) {
    for (Index j = 0; j < n; ++j) {
      x[j] = warm_start[static_cast<std::size_t>(j)];
      project(j);
    }
  }

  Vector r = y - A * x;
  Vector corr(n);

  auto current_value = [&] { return relax_objective(x, node, bounds, inst); };

  if (!order.empty()) {
    for (int it = 1; it <= options.max_iter; ++it) {
      double max_move = 0.0;
      for (Index j : order) {
        const double old = x[j];
        const double c = A.col(j).dot(r) + sq[j] * old;
        const double next =
            coordinate_update(node.state(j), c, sq[j], bounds.lower[j], bounds.upper[j], lambda);
        if (next != old) {
          r.noalias() -= (next - old) * A.col(j);
          x[j] = next;
          max_move = std::max(max_move, std::abs(next - old));
        }
      }
      out.iterations = it;
      if (options.residual_refresh > 0 && it % options.residual_refresh == 0) {
        r = y - A * x;
      }

      bool changed = false;
      if (hook) {
        corr.noalias() = A.transpose() * r;
        const HookResult hr = hook(r, corr, bounds);
        if (hr.bounds_changed) {
          changed = true;
          ++out.bound_updates;
          bool moved = false;
          for (Index j : order) {
            const double old = x[j];
            project(j);
            if (x[j] != old) moved = true;
          }
          if (moved) r = y - A * x;
        }
        if (hr.stop) {
          out.stopped = true;
          if (options.record_trace) {
            out.trace.push_back(current_value());
            out.trace_peeled.push_back(changed);
          }
          break;
        }
      }
      if (options.record_trace) {
        out.trace.push_back(current_value());
        out.trace_peeled.push_back(changed);
      }
      if (max_move <= options.tol && !changed) {
        out.converged = true;
        break;
      }
    }
  } else {
    out.converged = true;
  }

  out.w = y - A * x;
  out.corr = A.transpose() * out.w;
  out.value = current_value();
  return out;
}

}  // namespace l0peel
