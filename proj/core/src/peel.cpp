#include "l0peel/peel.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace l0peel {

namespace {

// Smallest representable alpha strictly above alpha_bar, shifted by eps.
double strict_threshold(double alpha_bar, double eps_alpha) {
  const double shifted = alpha_bar + eps_alpha;
  if (shifted > alpha_bar) return shifted;
  return std::nextafter(alpha_bar, std::numeric_limits<double>::infinity());
}

}  // namespace

double psi_upper(Index j, double corr_j, const BoxBounds& bounds, double lambda) {
  const double l = bounds.lower[j];
  const double u = bounds.upper[j];
  return pivot(lambda, l, u, corr_j) - u * positive_part(corr_j) + lambda;
}

double psi_lower(Index j, double corr_j, const BoxBounds& bounds, double lambda) {
  const double l = bounds.lower[j];
  const double u = bounds.upper[j];
  return pivot(lambda, l, u, corr_j) + l * positive_part(-corr_j) + lambda;
}

std::optional<double> peel_upper(Index j, double corr_j, double D, double p_bar,
                                 const BoxBounds& bounds, double lambda, double eps_alpha) {
  const double u = bounds.upper[j];
  if (!(u > 0.0)) return std::nullopt;
  const double base = D + psi_upper(j, corr_j, bounds, lambda);
  if (corr_j >= 0.0) {
    if (base > p_bar) return 0.0;
    return std::nullopt;
  }
  const double alpha_bar = (p_bar - base) / (-corr_j);
  if (alpha_bar < 0.0) return 0.0;
  const double alpha = strict_threshold(alpha_bar, eps_alpha);
  if (alpha < u) return alpha;
  return std::nullopt;
}

std::optional<double> peel_lower(Index j, double corr_j, double D, double p_bar,
                                 const BoxBounds& bounds, double lambda, double eps_alpha) {
  const double l = bounds.lower[j];
  if (!(l < 0.0)) return std::nullopt;
  const double base = D + psi_lower(j, corr_j, bounds, lambda);
  if (corr_j <= 0.0) {
    if (base > p_bar) return 0.0;
    return std::nullopt;
  }
  const double alpha_bar = (p_bar - base) / corr_j;
  if (alpha_bar < 0.0) return 0.0;
  const double alpha = strict_threshold(alpha_bar, eps_alpha);
  if (alpha < -l) return -alpha;
  return std::nullopt;
}

PeelOutcome peel_all(const NodePartition& node, const Vector& corr, double D, double p_bar,
                     const BoxBounds& bounds, double lambda, double eps_alpha,
                     bool record_events) {
  PeelOutcome out;
  out.bounds = bounds;
  if (!std::isfinite(p_bar)) return out;

  const Index n = bounds.size();
  for (Index j = 0; j < n; ++j) {
    if (!node.is_free(j)) continue;
    const double c = corr[j];
    if (auto u = peel_upper(j, c, D, p_bar, bounds, lambda, eps_alpha)) {
      if (*u < out.bounds.upper[j]) {
        if (record_events) {
          out.events.push_back({j, PeelSide::Upper, c, D, psi_upper(j, c, bounds, lambda), p_bar,
                                bounds.upper[j], *u});
        }
        out.bounds.upper[j] = *u;
        ++out.n_upper_peeled;
      }
    }
    if (auto l = peel_lower(j, c, D, p_bar, bounds, lambda, eps_alpha)) {
      if (*l > out.bounds.lower[j]) {
        if (record_events) {
          out.events.push_back({j, PeelSide::Lower, c, D, psi_lower(j, c, bounds, lambda), p_bar,
                                bounds.lower[j], *l});
        }
        out.bounds.lower[j] = *l;
        ++out.n_lower_peeled;
      }
    }
    if (out.bounds.degenerate(j)) out.implied_zero.push_back(j);
  }
  return out;
}

void write_peel_trace_header(std::ostream& out) {
  out << "node,j,side,corr,D,psi,p_bar,old_bound,new_bound\n";
}

void write_peel_trace(std::ostream& out, std::size_t node_id, const std::vector<PeelEvent>& events) {
  for (const auto& e : events) {
    out << node_id << ',' << e.j << ',' << (e.side == PeelSide::Upper ? "upper" : "lower") << ','
        << format_double(e.corr) << ',' << format_double(e.D) << ',' << format_double(e.psi)
        << ',' << format_double(e.p_bar) << ',' << format_double(e.old_bound) << ','
        << format_double(e.new_bound) << '\n';
  }
}

}  // namespace l0peel
