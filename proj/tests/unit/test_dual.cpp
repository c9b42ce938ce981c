#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "l0peel/dual.hpp"
#include "l0peel/relax.hpp"
#include "random_problems.hpp"

namespace l0peel {
namespace {

using testing::random_box;
using testing::random_feasible_point;
using testing::random_gaussian;
using testing::random_instance;
using testing::random_partition;
using testing::uniform;

// sup over x in {l, l + h, ..., u} of f(x)
template <typename F>
double grid_sup(double lower, double upper, double h, F f) {
  double best = f(upper);
  const auto count = static_cast<long>(std::floor((upper - lower) / h));
  for (long k = 0; k <= count; ++k) best = std::max(best, f(lower + static_cast<double>(k) * h));
  return best;
}

TEST(Pivot, Examples) {
  EXPECT_EQ(pivot(0.5, -1.0, 2.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(pivot(0.5, -1.0, 2.0, 1.0), 1.5);
  EXPECT_DOUBLE_EQ(pivot(0.0, -1.0, 2.0, -1.0), 1.0);
}

TEST(ConjugateBoxConst, Examples) {
  EXPECT_DOUBLE_EQ(conjugate_box_const(0.7, -1.0, 2.0, 0.0), -0.7);
  for (double v : {-3.0, 0.0, 0.4, 10.0}) {
    EXPECT_DOUBLE_EQ(conjugate_box_const(0.7, 0.0, 0.0, v), -0.7);
    EXPECT_EQ(conjugate_box_const(0.0, 0.0, 0.0, v), 0.0);
  }
}

TEST(ConjugateBoxConst, MatchesGridSupremum) {
  const double b = 0.5, l = -1.0, u = 2.0, h = 1e-4;
  for (int k = 0; k <= 200; ++k) {
    const double v = -5.0 + 0.05 * k;
    const double sup = grid_sup(l, u, h, [&](double x) { return v * x - b; });
    EXPECT_NEAR(conjugate_box_const(b, l, u, v), sup, 2.0 * h * std::abs(v)) << "v=" << v;
  }
}

TEST(ConjugateBoxLinear, Examples) {
  EXPECT_EQ(conjugate_box_linear(0.7, -2.0, 1.0, 0.0), 0.0);
  for (double v : {-3.0, 0.0, 2.5}) EXPECT_EQ(conjugate_box_linear(0.7, 0.0, 0.0, v), 0.0);
}

TEST(ConjugateBoxLinear, MatchesGridSupremum) {
  const double a = 0.7, l = -2.0, u = 1.0, h = 1e-4;
  auto g = [&](double x) { return a * (x > 0.0 ? x / u : x / l); };
  for (int k = 0; k <= 200; ++k) {
    const double v = -5.0 + 0.05 * k;
    const double sup = grid_sup(l, u, h, [&](double x) { return v * x - g(x); });
    const double slope = std::abs(v) + a * std::max(1.0 / u, -1.0 / l);
    EXPECT_NEAR(conjugate_box_linear(a, l, u, v), sup, 2.0 * h * slope) << "v=" << v;
  }
}

TEST(DualObjective, ZeroResidualGivesConstant) {
  Rng rng(1);
  const ProblemInstance base = random_instance(4, 6, rng);
  const ProblemInstance inst(base.y(), base.A(), 0.5);
  const NodePartition node =
      NodePartition::from_sets(6, std::vector<Index>{0}, std::vector<Index>{2, 5});
  const DualEvaluation d = dual_objective(Vector::Zero(4), node, BoxBounds::big_m(6, 1.5), inst);
  EXPECT_DOUBLE_EQ(d.value, 1.0);
}

TEST(DualObjective, FullyFixedNodeIsTight) {
  Rng rng(2);
  const ProblemInstance inst = random_instance(4, 5, rng);
  NodePartition node(5);
  for (Index i = 0; i < 5; ++i) node.fix_zero(i);
  BoxBounds box = BoxBounds::big_m(5, 1.0);
  const DualEvaluation d = dual_objective(inst.y(), node, box, inst);
  EXPECT_DOUBLE_EQ(d.value, inst.half_sq_norm_y());
  EXPECT_DOUBLE_EQ(d.value, solve_relaxation(inst, node, box).value);
}

TEST(DualObjective, ConvergedRelaxationClosesTheGap) {
  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    const ProblemInstance inst = random_instance(4, 6, rng);
    const NodePartition node = random_partition(6, rng);
    BoxBounds box = random_box(6, rng);
    RelaxOptions opt;
    opt.tol = 1e-12;
    opt.max_iter = 100000;
    const RelaxationResult r = solve_relaxation(inst, node, box, opt);
    const double D = dual_objective(r.w, node, box, inst).value;
    EXPECT_LE(D, r.value + 1e-12);
    EXPECT_LT(r.value - D, 1e-6) << "rep " << rep;
  }
}

TEST(DualObjective, WeakDuality) {
  Rng rng(4);
  for (int rep = 0; rep < 1000; ++rep) {
    const Index m = 2 + rep % 5;
    const Index n = 2 + rep % 7;
    const ProblemInstance inst = random_instance(m, n, rng);
    const NodePartition node = random_partition(n, rng);
    const BoxBounds box = random_box(n, rng);
    const Vector w = random_gaussian(m, rng, uniform(rng, 0.01, 3.0));
    const Vector x = random_feasible_point(node, box, rng);
    EXPECT_LE(dual_objective(w, node, box, inst).value, relax_objective(x, node, box, inst) + 1e-9);
  }
}

TEST(DualObjective, IsConcave) {
  Rng rng(5);
  for (int rep = 0; rep < 500; ++rep) {
    const ProblemInstance inst = random_instance(4, 6, rng);
    const NodePartition node = random_partition(6, rng);
    const BoxBounds box = random_box(6, rng);
    const Vector w1 = random_gaussian(4, rng, 2.0);
    const Vector w2 = random_gaussian(4, rng, 2.0);
    const double t = uniform(rng, 0.0, 1.0);
    const double mid = dual_objective(t * w1 + (1.0 - t) * w2, node, box, inst).value;
    const double chord = t * dual_objective(w1, node, box, inst).value +
                         (1.0 - t) * dual_objective(w2, node, box, inst).value;
    EXPECT_GE(mid, chord - 1e-10);
  }
}

TEST(DualObjective, PrecomputedCorrelationIsBitwiseEqual) {
  Rng rng(6);
  for (int rep = 0; rep < 100; ++rep) {
    const ProblemInstance inst = random_instance(5, 7, rng);
    const NodePartition node = random_partition(7, rng);
    const BoxBounds box = random_box(7, rng);
    const Vector w = random_gaussian(5, rng);
    const DualEvaluation d = dual_objective(w, node, box, inst);
    const Vector corr = inst.A().transpose() * w;
    EXPECT_EQ(d.corr, corr);
    EXPECT_EQ(d.value, dual_value(w, corr, node, box, inst));
  }
}

}  // namespace
}  // namespace l0peel
