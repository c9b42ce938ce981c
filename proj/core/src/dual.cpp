#include "l0peel/dual.hpp"

#include <stdexcept>

namespace l0peel {

double dual_value(const Vector& w, const Vector& corr, const NodePartition& node,
                  const BoxBounds& bounds, const ProblemInstance& inst) {
  const Index n = inst.n();
  if (w.size() != inst.m() || corr.size() != n) {
    throw std::invalid_argument("dual_value: dimension mismatch");
  }
  const double lambda = inst.lambda();
  double hinge = 0.0;
  for (Index i = 0; i < n; ++i) {
    switch (node.state(i)) {
      case VarState::Zero:
        break;
      case VarState::One:
        hinge += pivot(0.0, bounds.lower[i], bounds.upper[i], corr[i]);
        break;
      case VarState::Free:
        hinge += pivot(lambda, bounds.lower[i], bounds.upper[i], corr[i]);
        break;
    }
  }
  return inst.half_sq_norm_y() - 0.5 * (inst.y() - w).squaredNorm() +
         lambda * static_cast<double>(node.num_ones()) - hinge;
}

DualEvaluation dual_objective(const Vector& w, const NodePartition& node, const BoxBounds& bounds,
                              const ProblemInstance& inst) {
  DualEvaluation out;
  out.w = w;
  out.corr = inst.A().transpose() * w;
  out.value = dual_value(w, out.corr, node, bounds, inst);
  return out;
}

}  // namespace l0peel
