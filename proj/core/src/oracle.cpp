#include "l0peel/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>

namespace l0peel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kStrictGap = 1e-12;

// Calls fn(subset) for every subset of `pool` of size <= max_size, smallest
// sizes first, lexicographic within a size.
void for_each_subset(const std::vector<Index>& pool, Index max_size,
                     const std::function<void(const std::vector<Index>&)>& fn) {
  const auto n = static_cast<Index>(pool.size());
  std::vector<Index> pick;
  std::vector<Index> subset;
  for (Index size = 0; size <= std::min(max_size, n); ++size) {
    pick.resize(static_cast<std::size_t>(size));
    for (Index i = 0; i < size; ++i) pick[static_cast<std::size_t>(i)] = i;
    while (true) {
      subset.clear();
      for (Index p : pick) subset.push_back(pool[static_cast<std::size_t>(p)]);
      fn(subset);
      Index i = size - 1;
      while (i >= 0 && pick[static_cast<std::size_t>(i)] == n - size + i) --i;
      if (i < 0) break;
      ++pick[static_cast<std::size_t>(i)];
      for (Index q = i + 1; q < size; ++q) {
        pick[static_cast<std::size_t>(q)] = pick[static_cast<std::size_t>(q - 1)] + 1;
      }
    }
  }
}

Matrix gather_columns(const Matrix& A, const std::vector<Index>& cols) {
  Matrix B(A.rows(), static_cast<Index>(cols.size()));
  for (std::size_t q = 0; q < cols.size(); ++q) B.col(static_cast<Index>(q)) = A.col(cols[q]);
  return B;
}

double half_residual(const Matrix& B, const Vector& y, const Vector& z) {
  return 0.5 * (y - B * z).squaredNorm();
}

// Fixes the coordinates of `z` that sit on a bound and re-solves least squares
// on the rest. Returns the polished point when it stays in the box.
std::optional<Vector> polish(const Matrix& B, const Vector& y, const Vector& lo, const Vector& hi,
                             const Vector& z) {
  const Index d = z.size();
  std::vector<Index> inner;
  Vector fixed = Vector::Zero(d);
  for (Index i = 0; i < d; ++i) {
    if (z[i] <= lo[i] || z[i] >= hi[i]) {
      fixed[i] = z[i];
    } else {
      inner.push_back(i);
    }
  }
  if (inner.empty()) return std::nullopt;
  const Vector rhs = y - B * fixed;
  const Matrix Bi = gather_columns(B, inner);
  const Vector zi = Bi.completeOrthogonalDecomposition().solve(rhs);
  Vector out = fixed;
  for (std::size_t q = 0; q < inner.size(); ++q) {
    const Index i = inner[q];
    const double v = zi[static_cast<Index>(q)];
    if (v < lo[i] || v > hi[i] || !std::isfinite(v)) return std::nullopt;
    out[i] = v;
  }
  return out;
}

// Primal active-set method for min 1/2|y - B z|^2 over lo <= z <= hi. Steps
// on the free coordinates are least-norm, so rank-deficient B is fine.
// Returns nullopt when it fails to certify the KKT conditions.
std::optional<Vector> active_set(const Matrix& B, const Vector& y, const Vector& lo,
                                 const Vector& hi, double tol) {
  const Index d = B.cols();
  enum class At : std::uint8_t { Free, Lower, Upper };
  std::vector<At> at(static_cast<std::size_t>(d), At::Free);
  for (Index i = 0; i < d; ++i) {
    if (lo[i] == hi[i]) at[static_cast<std::size_t>(i)] = At::Lower;
  }
  Vector z = Vector::Zero(d).cwiseMax(lo).cwiseMin(hi);
  const double scale = 1.0 + B.cwiseAbs().maxCoeff() * (1.0 + y.cwiseAbs().maxCoeff());

  for (int it = 0; it < 50 * static_cast<int>(d) + 50; ++it) {
    std::vector<Index> free;
    for (Index i = 0; i < d; ++i) {
      if (at[static_cast<std::size_t>(i)] == At::Free) free.push_back(i);
    }
    Vector step = Vector::Zero(d);
    if (!free.empty()) {
      const Vector r = y - B * z;
      const Vector p = gather_columns(B, free).completeOrthogonalDecomposition().solve(r);
      for (std::size_t q = 0; q < free.size(); ++q) step[free[q]] = p[static_cast<Index>(q)];
    }

    if (step.cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + z.cwiseAbs().maxCoeff())) {
      const Vector g = B.transpose() * (B * z - y);
      Index worst = -1;
      double worst_violation = tol * scale;
      for (Index i = 0; i < d; ++i) {
        if (lo[i] == hi[i]) continue;
        const At a = at[static_cast<std::size_t>(i)];
        const double violation = a == At::Lower ? -g[i] : a == At::Upper ? g[i] : 0.0;
        if (violation > worst_violation) {
          worst_violation = violation;
          worst = i;
        }
      }
      if (worst < 0) return z;
      at[static_cast<std::size_t>(worst)] = At::Free;
      continue;
    }

    double alpha = 1.0;
    Index blocking = -1;
    for (Index i : free) {
      double a = 1.0;
      if (step[i] > 0.0 && z[i] + step[i] > hi[i]) a = (hi[i] - z[i]) / step[i];
      if (step[i] < 0.0 && z[i] + step[i] < lo[i]) a = (lo[i] - z[i]) / step[i];
      if (a < alpha) {
        alpha = a;
        blocking = i;
      }
    }
    z = (z + std::max(alpha, 0.0) * step).cwiseMax(lo).cwiseMin(hi);
    if (blocking >= 0) {
      const bool upper = step[blocking] > 0.0;
      z[blocking] = upper ? hi[blocking] : lo[blocking];
      at[static_cast<std::size_t>(blocking)] = upper ? At::Upper : At::Lower;
    }
  }
  return std::nullopt;
}

}  // namespace

double count_supports(Index n, Index max_support) {
  double total = 0.0;
  double binom = 1.0;
  for (Index k = 0; k <= std::min(n, max_support); ++k) {
    total += binom;
    binom = binom * static_cast<double>(n - k) / static_cast<double>(k + 1);
  }
  return total;
}

Vector oracle_box_least_squares(const Matrix& B, const Vector& y, const Vector& lo,
                                const Vector& hi, double tol, int max_iter) {
  const Index d = B.cols();
  if (d == 0) return Vector(0);

  // Unconstrained least-norm solution first; exact when it is inside the box.
  Vector z = B.completeOrthogonalDecomposition().solve(y);
  if (z.allFinite() && (z.array() >= lo.array()).all() && (z.array() <= hi.array()).all()) {
    return z;
  }
  if (auto exact = active_set(B, y, lo, hi, tol)) return *exact;
  if (!z.allFinite()) z.setZero();
  z = z.cwiseMax(lo).cwiseMin(hi);

  const Matrix G = B.transpose() * B;
  const Vector b = B.transpose() * y;
  const double L = Eigen::SelfAdjointEigenSolver<Matrix>(G, Eigen::EigenvaluesOnly)
                       .eigenvalues()
                       .maxCoeff();
  if (!(L > 0.0)) return z;  // zero columns: any feasible point is optimal
  const double step = 1.0 / L;

  // Accelerated projected gradient with function-value restart.
  Vector v = z;
  Vector z_prev = z;
  double t = 1.0;
  double f_prev = half_residual(B, y, z);
  for (int it = 0; it < max_iter; ++it) {
    const Vector grad = G * v - b;
    Vector next = (v - step * grad).cwiseMax(lo).cwiseMin(hi);
    const double f_next = half_residual(B, y, next);
    if (f_next > f_prev) {
      // restart from the last accepted point
      t = 1.0;
      v = z;
      continue;
    }
    const double move = (next - z).cwiseAbs().maxCoeff();
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    z_prev = z;
    z = next;
    v = z + ((t - 1.0) / t_next) * (z - z_prev);
    t = t_next;
    f_prev = f_next;
    if (move <= tol) {
      const Vector pg = (z - (G * z - b) * step).cwiseMax(lo).cwiseMin(hi) - z;
      if (pg.cwiseAbs().maxCoeff() <= tol) break;
    }
  }

  if (auto p = polish(B, y, lo, hi, z)) {
    if (half_residual(B, y, *p) <= half_residual(B, y, z)) return *p;
  }
  return z;
}

OracleResult brute_force_global(const ProblemInstance& inst, Index max_support, double budget) {
  const Index n = inst.n();
  if (count_supports(n, max_support) > budget) {
    throw OracleBudgetExceeded("brute_force_global: too many supports");
  }
  std::vector<Index> pool(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;

  OracleResult best;
  best.value = kInf;
  std::vector<Index> best_support;
  std::size_t count = 0;
  for_each_subset(pool, max_support, [&](const std::vector<Index>& S) {
    ++count;
    Vector x = Vector::Zero(n);
    if (!S.empty()) {
      const Matrix B = gather_columns(inst.A(), S);
      const Vector z = B.completeOrthogonalDecomposition().solve(inst.y());
      for (std::size_t q = 0; q < S.size(); ++q) x[S[q]] = z[static_cast<Index>(q)];
    }
    const double value = objective(x, inst);
    const bool better =
        value < best.value ||
        (value == best.value && std::lexicographical_compare(S.begin(), S.end(),
                                                             best_support.begin(),
                                                             best_support.end()));
    if (better) {
      best.value = value;
      best.x = std::move(x);
      best_support = S;
    }
  });
  best.enumerated_count = count;
  for (Index i = 0; i < n; ++i) {
    if (best.x[i] != 0.0) best.support.push_back(i);
  }
  return best;
}

OracleResult brute_force_node(const ProblemInstance& inst, const NodePartition& node,
                              const BoxBounds& bounds, const std::optional<HalfLine>& extra,
                              double budget) {
  const Index n = inst.n();
  const std::vector<Index> ones = node.ones();
  const std::vector<Index> pool = node.free();
  if (count_supports(static_cast<Index>(pool.size()), static_cast<Index>(pool.size())) > budget) {
    throw OracleBudgetExceeded("brute_force_node: too many supports");
  }

  OracleResult best;
  best.value = kInf;
  best.x = Vector::Zero(n);
  std::size_t count = 0;

  for_each_subset(pool, static_cast<Index>(pool.size()), [&](const std::vector<Index>& T) {
    ++count;
    std::vector<Index> S = ones;
    S.insert(S.end(), T.begin(), T.end());
    std::sort(S.begin(), S.end());

    const auto d = static_cast<Index>(S.size());
    Vector lo(d), hi(d);
    bool has_extra = false;
    for (Index q = 0; q < d; ++q) {
      const Index i = S[static_cast<std::size_t>(q)];
      lo[q] = bounds.lower[i];
      hi[q] = bounds.upper[i];
      if (extra && extra->j == i) {
        has_extra = true;
        if (extra->side == PeelSide::Upper) {
          lo[q] = std::max(lo[q], extra->alpha + kStrictGap);
        } else {
          hi[q] = std::min(hi[q], -extra->alpha - kStrictGap);
        }
      }
    }
    // The half-line excludes x_j = 0, so j must be in the support.
    if (extra && !has_extra) return;
    if ((lo.array() > hi.array()).any()) return;

    Vector z(0);
    double value = inst.half_sq_norm_y();
    if (d > 0) {
      const Matrix B = gather_columns(inst.A(), S);
      z = oracle_box_least_squares(B, inst.y(), lo, hi);
      value = half_residual(B, inst.y(), z);
    }
    value += inst.lambda() * static_cast<double>(d);
    if (value < best.value) {
      best.value = value;
      best.x.setZero();
      for (Index q = 0; q < d; ++q) best.x[S[static_cast<std::size_t>(q)]] = z[q];
      best.support = S;
    }
  });
  best.enumerated_count = count;
  if (std::isfinite(best.value)) {
    for (Index i : ones) {
      if (best.x[i] == 0.0) best.attained = false;
    }
  }
  return best;
}

}  // namespace l0peel
