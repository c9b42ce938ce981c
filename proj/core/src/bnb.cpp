#include "l0peel/bnb.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "l0peel/dual.hpp"

namespace l0peel {

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal:
      return "optimal";
    case SolveStatus::BudgetExhausted:
      return "budget_exhausted";
  }
  return "unknown";
}

std::vector<Index> support_of(const Vector& x) {
  std::vector<Index> s;
  for (Index i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) s.push_back(i);
  }
  return s;
}

namespace {

bool branchable(const NodePartition& partition, const BoxBounds& bounds, Index j) {
  return partition.is_free(j) && !bounds.degenerate(j);
}

bool has_branchable(const NodePartition& partition, const BoxBounds& bounds) {
  for (Index j = 0; j < partition.size(); ++j) {
    if (branchable(partition, bounds, j)) return true;
  }
  return false;
}

// Largest eigenvalue of G by power iteration, inflated slightly; the caller
// backtracks if it still turns out too small.
double lipschitz_estimate(const Matrix& G) {
  Vector v = Vector::Ones(G.rows()) / std::sqrt(static_cast<double>(G.rows()));
  double est = 0.0;
  for (int it = 0; it < 30; ++it) {
    Vector next = G * v;
    const double norm = next.norm();
    if (norm == 0.0) return 0.0;
    est = norm;
    v = next / norm;
  }
  return 1.05 * est;
}

}  // namespace

Vector restricted_least_squares(const ProblemInstance& inst, const std::vector<Index>& support,
                                const BoxBounds& bounds, double tol) {
  const Index n = inst.n();
  Vector x = Vector::Zero(n);
  const auto d = static_cast<Index>(support.size());
  if (d == 0) return x;

  Matrix B(inst.m(), d);
  Vector lo(d), hi(d);
  for (Index q = 0; q < d; ++q) {
    const Index i = support[static_cast<std::size_t>(q)];
    B.col(q) = inst.A().col(i);
    lo[q] = bounds.lower[i];
    hi[q] = bounds.upper[i];
  }
  const Matrix G = B.transpose() * B;
  const Vector b = B.transpose() * inst.y();

  Vector z = Vector::Zero(d);
  Eigen::LDLT<Matrix> ldlt(G);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
    Vector sol = ldlt.solve(b);
    if (sol.allFinite()) z = sol;
  }
  auto inside = [&](const Vector& v) {
    return (v.array() >= lo.array()).all() && (v.array() <= hi.array()).all();
  };
  auto f = [&](const Vector& v) { return 0.5 * v.dot(G * v) - b.dot(v); };

  if (!inside(z)) {
    z = z.cwiseMax(lo).cwiseMin(hi);
    double L = lipschitz_estimate(G);
    if (L > 0.0) {
      double fz = f(z);
      for (int it = 0; it < 100000; ++it) {
        const Vector grad = G * z - b;
        Vector next = (z - grad / L).cwiseMax(lo).cwiseMin(hi);
        const double fn = f(next);
        if (fn > fz + 1e-15 * std::abs(fz)) {
          L *= 2.0;
          continue;
        }
        const double move = (next - z).cwiseAbs().maxCoeff();
        z = std::move(next);
        fz = fn;
        if (move <= tol) break;
      }
    }
  }
  for (Index q = 0; q < d; ++q) x[support[static_cast<std::size_t>(q)]] = z[q];
  return x;
}

Index branching_index(const NodePartition& partition, const BoxBounds& bounds, const Vector& x_hat,
                      BranchingRule rule) {
  Index best = -1;
  double best_mag = -1.0;
  for (Index j = 0; j < partition.size(); ++j) {
    if (!branchable(partition, bounds, j)) continue;
    if (rule == BranchingRule::SmallestIndex) return j;
    const double mag = std::abs(x_hat[j]);
    if (mag > best_mag) {
      best = j;
      best_mag = mag;
    }
  }
  return best;
}

std::pair<BnbNode, BnbNode> branch(const BnbNode& node, const Vector& x_hat, BranchingRule rule) {
  const Index j = branching_index(node.partition, node.bounds, x_hat, rule);
  if (j < 0) throw std::logic_error("branch: no free coordinate to branch on");

  BnbNode zero;
  zero.partition = node.partition;
  zero.partition.fix_zero(j);
  zero.bounds = node.bounds;
  zero.bounds.lower[j] = 0.0;
  zero.bounds.upper[j] = 0.0;
  zero.warm_start = x_hat;
  zero.warm_start[j] = 0.0;
  zero.depth = node.depth + 1;

  BnbNode one;
  one.partition = node.partition;
  one.partition.fix_one(j);
  one.bounds = node.bounds;
  one.warm_start = x_hat;
  one.depth = node.depth + 1;

  return {std::move(zero), std::move(one)};
}

Incumbent update_incumbent(const Vector& x_hat, const NodePartition& node, const BoxBounds& bounds,
                           const ProblemInstance& inst, Incumbent incumbent, double tau,
                           double ls_tol) {
  std::vector<Index> support;
  for (Index i = 0; i < inst.n(); ++i) {
    const VarState s = node.state(i);
    if (s == VarState::One || (s == VarState::Free && std::abs(x_hat[i]) > tau)) {
      support.push_back(i);
    }
  }
  Vector candidate = restricted_least_squares(inst, support, bounds, ls_tol);
  const double value = objective(candidate, inst);
  if (value < incumbent.p_bar) {
    incumbent.x_best = std::move(candidate);
    incumbent.p_bar = value;
  }
  return incumbent;
}

SolveReport solve(const ProblemInstance& inst, const BoxBounds& root_bounds,
                  const SolverConfig& config, const SolveObserver& observer,
                  std::ostream* peel_trace) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const Index n = inst.n();
  if (root_bounds.size() != n) throw std::invalid_argument("solve: root bounds have wrong size");
  root_bounds.validate();

  const double lambda = inst.lambda();
  SolveReport report;

  Incumbent incumbent;
  incumbent.x_best = Vector::Zero(n);
  incumbent.p_bar = objective(incumbent.x_best, inst);

  RelaxOptions relax_options;
  relax_options.tol = config.relax_tol;
  relax_options.max_iter = config.relax_max_iter;
  relax_options.residual_refresh = config.residual_refresh;

  std::vector<BnbNode> stack;
  {
    BnbNode root;
    root.partition = NodePartition(n);
    root.bounds = root_bounds;
    root.warm_start = Vector::Zero(n);
    stack.push_back(std::move(root));
  }
  if (peel_trace != nullptr) write_peel_trace_header(*peel_trace);

  std::size_t next_id = 0;
  while (!stack.empty()) {
    if (report.node_count >= config.max_nodes ||
        std::chrono::duration<double>(Clock::now() - start).count() > config.time_limit_s) {
      report.status = SolveStatus::BudgetExhausted;
      report.valid = false;
      break;
    }

    BnbNode node = std::move(stack.back());
    stack.pop_back();
    const std::size_t id = next_id++;
    ++report.node_count;
    report.max_depth = std::max(report.max_depth, node.depth);

    const double p_before = incumbent.p_bar;
    std::optional<BoxBounds> input_bounds;
    if (observer) input_bounds = node.bounds;
    int node_peels = 0;

    auto emit = [&](NodeOutcome outcome, double lower_bound) {
      if (!observer) return;
      NodeRecord rec;
      rec.id = id;
      rec.parent = node.parent;
      rec.depth = node.depth;
      rec.partition = &node.partition;
      rec.input_bounds = &*input_bounds;
      rec.final_bounds = &node.bounds;
      rec.lower_bound = lower_bound;
      rec.p_bar_before = p_before;
      rec.p_bar_after = incumbent.p_bar;
      rec.peels = node_peels;
      rec.outcome = outcome;
      observer(rec);
    };

    // Every free coordinate is pinned to zero: solve the node exactly.
    auto solve_leaf = [&]() {
      Vector x = restricted_least_squares(inst, node.partition.ones(), node.bounds, config.ls_tol);
      const double node_value = 0.5 * (inst.y() - inst.A() * x).squaredNorm() +
                                lambda * static_cast<double>(node.partition.num_ones());
      const double value = objective(x, inst);
      if (value < incumbent.p_bar) {
        incumbent.x_best = std::move(x);
        incumbent.p_bar = value;
      }
      ++report.leaf_count;
      emit(NodeOutcome::Leaf, node_value);
    };

    if (!has_branchable(node.partition, node.bounds)) {
      solve_leaf();
      continue;
    }

    PeelHook hook = [&](const Vector& w, const Vector& corr, BoxBounds& bounds) -> HookResult {
      const double D = dual_value(w, corr, node.partition, bounds, inst);
      if (prune_test(D, incumbent.p_bar, config.eps_prune)) return {false, true};
      if (!config.peeling) return {};
      PeelOutcome peeled = peel_all(node.partition, corr, D, incumbent.p_bar + config.eps_prune,
                                    bounds, lambda, config.eps_alpha, peel_trace != nullptr);
      if (peeled.fired() == 0) return {};
      node_peels += peeled.fired();
      report.peel_fire_count += peeled.fired();
      if (peel_trace != nullptr) write_peel_trace(*peel_trace, id, peeled.events);
      bounds = std::move(peeled.bounds);
      return {true, false};
    };

    RelaxationResult rel =
        solve_relaxation(inst, node.partition, node.bounds, relax_options,
                         std::span<const double>(node.warm_start.data(),
                                                 static_cast<std::size_t>(node.warm_start.size())),
                         hook);
    report.sweep_count += rel.iterations;

    // The dual value is a valid bound at any w; the primal value only once the
    // solve has converged.
    double lower_bound = dual_value(rel.w, rel.corr, node.partition, node.bounds, inst);
    if (rel.converged) lower_bound = std::max(lower_bound, rel.value);

    if (prune_test(lower_bound, incumbent.p_bar, config.eps_prune)) {
      ++report.pruned_count;
      emit(NodeOutcome::Pruned, lower_bound);
      continue;
    }

    incumbent = update_incumbent(rel.x_hat, node.partition, node.bounds, inst, std::move(incumbent),
                                 config.tau_supp, config.ls_tol);

    if (prune_test(lower_bound, incumbent.p_bar, config.eps_prune)) {
      ++report.pruned_count;
      emit(NodeOutcome::Pruned, lower_bound);
      continue;
    }
    if (lower_bound >= incumbent.p_bar - config.eps_close) {
      ++report.closed_count;
      emit(NodeOutcome::Closed, lower_bound);
      continue;
    }

    if (!has_branchable(node.partition, node.bounds)) {
      solve_leaf();
      continue;
    }

    auto [zero, one] = branch(node, rel.x_hat, config.branching);
    zero.parent = id;
    one.parent = id;
    emit(NodeOutcome::Branched, lower_bound);
    stack.push_back(std::move(zero));
    stack.push_back(std::move(one));
  }

  report.x_star = std::move(incumbent.x_best);
  report.p_star = incumbent.p_bar;
  report.wall_time = Clock::now() - start;
  return report;
}

std::string solve_report_csv_header() {
  return "instance,flags,p_star,node_count,peel_fire_count,wall_time_ms,status";
}

std::string solve_report_csv_row(const SolveReport& report, const std::string& instance_id,
                                 const std::string& flags) {
  std::ostringstream row;
  row << instance_id << ',' << flags << ',' << format_double(report.p_star) << ','
      << report.node_count << ',' << report.peel_fire_count << ','
      << format_double(report.wall_time.count() * 1e3) << ',' << to_string(report.status);
  return row.str();
}

}  // namespace l0peel
