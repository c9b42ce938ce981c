// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "l0peel/bnb.hpp"
#include "l0peel/dual.hpp"
#include "l0peel/oracle.hpp"
#include "l0peel/peel.hpp"
#include "l0peel/relax.hpp"
#include "l0peel/sweep.hpp"
#include "random_problems.hpp"

using namespace l0peel;
using l0peel::testing::random_box;
using l0peel::testing::random_feasible_point;
using l0peel::testing::random_gaussian;
using l0peel::testing::random_instance;
using l0peel::testing::random_partition;
using l0peel::testing::uniform;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Criteria 1, 2 and 9 share one suite of small instances.
struct SmallCase {
  double p_oracle = 0.0;
  double p_peel = 0.0;
  double p_plain = 0.0;
  std::vector<Index> support_peel;
  std::vector<Index> support_plain;
  double calib_value = 0.0;
  double calib_norm = 0.0;
  double M = 0.0;
  double gamma = 1.0;
  bool optimal = true;
};

struct SmallSuite {
  std::vector<SmallCase> cases;
  double seconds = 0.0;
};

SmallSuite run_small_suite() {
  SmallSuite suite;
  const auto t0 = Clock::now();
  for (int i = 0; i < 100; ++i) {
    ExperimentConfig cfg;
    cfg.m = i % 2 == 0 ? 8 : 10;
    cfg.n = i % 2 == 0 ? 10 : 12;
    cfg.k = 1 + (i / 2) % 3;
    cfg.snr_db = 15.0;
    cfg.gamma = (i / 6) % 2 == 0 ? 1.0 : 3.0;
    const Trial t = make_trial(cfg, 90000 + static_cast<std::uint64_t>(i));
    const ProblemInstance& inst = t.instance;

    const double M0 = t.truth.x_dagger.cwiseAbs().maxCoeff();
    const BigMCalibration cal = calibrate_with_solver(inst, cfg.gamma, cfg.eta, M0, {});
    const BoxBounds box = BoxBounds::big_m(inst.n(), cal.M);

    SolverConfig on, off;
    off.peeling = false;
    const SolveReport a = solve(inst, box, on);
    const SolveReport b = solve(inst, box, off);
    const OracleResult o = brute_force_global(inst, inst.n());

    SmallCase c;
    c.p_oracle = o.value;
    c.p_peel = a.p_star;
    c.p_plain = b.p_star;
    c.support_peel = support_of(a.x_star);
    c.support_plain = support_of(b.x_star);
    c.calib_value = objective(cal.x_star, inst);
    c.calib_norm = cal.x_star.cwiseAbs().maxCoeff();
    c.M = cal.M;
    c.gamma = cfg.gamma;
    c.optimal = a.valid && b.valid;
    suite.cases.push_back(std::move(c));
  }
  suite.seconds = seconds_since(t0);
  return suite;
}

Verdict exactness(const SmallSuite& s) {
  double worst = 0.0;
  int bad = 0;
  for (const auto& c : s.cases) {
    const double err = std::max(std::abs(c.p_peel - c.p_oracle), std::abs(c.p_plain - c.p_oracle));
    worst = std::max(worst, err);
    if (err > 1e-8 || !c.optimal) ++bad;
  }
  Verdict v;
  v.pass = bad == 0 && s.seconds < 120.0;
  v.detail = std::to_string(s.cases.size()) + " instances, " + std::to_string(bad) +
             " mismatches, max |p - p_oracle| " + fmt("%.2e", worst) + ", " +
             fmt("%.1f s", s.seconds);
  return v;
}

Verdict peeling_safety(const SmallSuite& s) {
  int value_diff = 0, support_diff = 0;
  for (const auto& c : s.cases) {
    if (std::abs(c.p_peel - c.p_plain) > 1e-8) ++value_diff;
    if (c.support_peel != c.support_plain) ++support_diff;
  }
  Verdict v;
  v.pass = value_diff == 0 && support_diff == 0;
  v.detail = std::to_string(value_diff) + " p_star differences, " + std::to_string(support_diff) +
             " support differences";
  return v;
}

Verdict calibration(const SmallSuite& s) {
  int value_bad = 0, margin_bad = 0;
  for (const auto& c : s.cases) {
    if (std::abs(c.calib_value - c.p_oracle) > 1e-8) ++value_bad;
    if (c.gamma > 1.0 && !(c.M > c.calib_norm)) ++margin_bad;
  }
  Verdict v;
  v.pass = value_bad == 0 && margin_bad == 0;
  v.detail = std::to_string(value_bad) + " calibrated x* off the oracle optimum, " +
             std::to_string(margin_bad) + " cases with M <= |x*|_inf at gamma > 1";
  return v;
}

Verdict certificate_validity() {
  Rng rng(31);
  double worst = std::numeric_limits<double>::infinity();
  int checked = 0;
  for (PeelSide side : {PeelSide::Upper, PeelSide::Lower}) {
    int done = 0;
    while (done < 200) {
      const ProblemInstance inst = random_instance(3, 4, rng);
      const NodePartition node = random_partition(4, rng, 0.7);
      const BoxBounds box = random_box(4, rng, 0.05);
      const auto free = node.free();
      if (free.empty()) continue;
      const Index j = free[static_cast<std::size_t>(done) % free.size()];
      const double room = side == PeelSide::Upper ? box.upper[j] : -box.lower[j];
      if (!(room > 0.0)) continue;
      Vector w;
      if (done % 2 == 0) {
        BoxBounds copy = box;
        w = solve_relaxation(inst, node, copy).w;
      } else {
        w = random_gaussian(3, rng, uniform(rng, 0.1, 2.0));
      }
      const DualEvaluation d = dual_objective(w, node, box, inst);
      const double c = d.corr[j];
      const double alpha = uniform(rng, 0.0, room);
      const double cert =
          side == PeelSide::Upper
              ? d.value + psi_upper(j, c, box, inst.lambda()) + alpha * std::max(-c, 0.0)
              : d.value + psi_lower(j, c, box, inst.lambda()) + alpha * std::max(c, 0.0);
      const OracleResult o = brute_force_node(inst, node, box, HalfLine{j, side, alpha});
      worst = std::min(worst, o.value - cert);
      ++done;
      ++checked;
    }
  }
  Verdict v;
  v.pass = worst >= -1e-9;
  v.detail = std::to_string(checked) + " node problems (both sides), min margin " +
             fmt("%.3e", worst);
  return v;
}

Verdict weak_duality() {
  Rng rng(41);
  double worst = std::numeric_limits<double>::infinity();
  for (int rep = 0; rep < 1000; ++rep) {
    const Index m = 2 + rep % 6;
    const Index n = 2 + rep % 9;
    const ProblemInstance inst = random_instance(m, n, rng);
    const NodePartition node = random_partition(n, rng);
    const BoxBounds box = random_box(n, rng);
    const Vector w = random_gaussian(m, rng, uniform(rng, 0.01, 3.0));
    const Vector x = random_feasible_point(node, box, rng);
    const double gap =
        relax_objective(x, node, box, inst) + 1e-9 - dual_objective(w, node, box, inst).value;
    worst = std::min(worst, gap);
  }
  Verdict v;
  v.pass = worst >= 0.0;
  v.detail = "1000 tuples, min (r(x) + 1e-9 - D(w)) " + fmt("%.3e", worst);
  return v;
}

Verdict conjugates() {
  Rng rng(51);
  const double h = 1e-4;
  double worst_ratio = 0.0;
  auto grid_sup = [h](double l, double u, const std::function<double(double)>& f) {
    double best = f(u);
    const auto count = static_cast<long>(std::floor((u - l) / h));
    for (long k = 0; k <= count; ++k) best = std::max(best, f(l + static_cast<double>(k) * h));
    return best;
  };
  for (int rep = 0; rep < 100; ++rep) {
    const double l = -uniform(rng, 0.1, 2.0), u = uniform(rng, 0.1, 2.0);
    const double b = uniform(rng, -1.0, 1.0), a = uniform(rng, 0.0, 1.5);
    for (int k = 0; k <= 200; ++k) {
      const double v = -5.0 + 0.05 * k;
      const double s1 = grid_sup(l, u, [&](double x) { return v * x - b; });
      const double e1 = std::abs(conjugate_box_const(b, l, u, v) - s1);
      worst_ratio = std::max(worst_ratio, e1 / (2.0 * h * std::max(1.0, std::abs(v))));

      auto g = [&](double x) { return a * (x > 0.0 ? x / u : x / l); };
      const double s2 = grid_sup(l, u, [&](double x) { return v * x - g(x); });
      const double e2 = std::abs(conjugate_box_linear(a, l, u, v) - s2);
      const double slope = std::abs(v) + a * std::max(1.0 / u, -1.0 / l);
      worst_ratio = std::max(worst_ratio, e2 / (2.0 * h * slope));
    }
  }
  Verdict v;
  v.pass = worst_ratio <= 1.0;
  v.detail = "100 draws x 201 v per lemma, worst error / (2 x grid resolution) " +
             fmt("%.3f", worst_ratio);
  return v;
}

Verdict relaxation_solver() {
  Rng rng(61);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const ProblemInstance inst = random_instance(3, 4, rng);
    const NodePartition root(4);
    BoxBounds box = random_box(4, rng);
    const RelaxationResult r = solve_relaxation(inst, root, box);
    const double ref = l0peel::testing::reference_relaxation_value(inst, root, box, rng, 20, 1e-10);
    worst = std::max(worst, std::abs(r.value - ref));
  }
  Verdict v;
  v.pass = worst <= 1e-6;
  v.detail = "50 root relaxations, max |CD - reference| " + fmt("%.2e", worst);
  return v;
}

SweepSpec desk_spec(double rho, std::vector<double> gammas, std::uint64_t seed) {
  SweepSpec spec;
  spec.base.m = 30;
  spec.base.n = 40;
  spec.base.k = 3;
  spec.base.rho = rho;
  spec.base.seed = seed;
  spec.variable = SweepVariable::Gamma;
  spec.values = std::move(gammas);
  spec.trials = 20;
  return spec;
}

double mean_nodes(const SweepResult& r, const std::string& variant) {
  double total = 0.0;
  int count = 0;
  for (const auto& row : r.rows) {
    if (row.variant != variant) continue;
    total += static_cast<double>(row.node_count);
    ++count;
  }
  return total / count;
}

Verdict node_count_direction(SweepResult& easy_out) {
  const auto t0 = Clock::now();
  const SweepSpec spec = desk_spec(0.1, {1.0, 2.0, 3.0, 5.0}, 7001);
  Verdict v;
  try {
    easy_out = run_sweep(spec);
  } catch (const SafetyViolation& e) {
    v.pass = false;
    v.detail = std::string("safety violation: ") + e.what();
    return v;
  }
  const double secs = seconds_since(t0);
  bool all_le = true, some_lt = false;
  std::ostringstream d;
  for (const auto& s : easy_out.summary) {
    const double plain = s.mean_nodes[0], peel = s.mean_nodes[1];
    all_le = all_le && peel <= plain;
    some_lt = some_lt || peel < plain;
    d << "gamma=" << s.value << ": " << plain << " -> " << peel << "; ";
  }
  int exhausted = 0;
  for (const auto& row : easy_out.rows) exhausted += row.status != SolveStatus::Optimal;
  v.pass = all_le && some_lt && secs < 600.0 && exhausted == 0;
  d << "mean nodes nopeel -> peel, " << exhausted << " budget hits, " << fmt("%.1f s", secs);
  v.detail = d.str();
  return v;
}

Verdict hardness_trend() {
  // gamma = 1 keeps the comparison about the data regime only
  const auto t0 = Clock::now();
  Verdict v;
  try {
    const SweepResult easy = run_sweep(desk_spec(0.1, {1.0}, 8001));
    const SweepResult hard = run_sweep(desk_spec(0.6, {1.0}, 8001));
    const double gain_easy = mean_nodes(easy, "nopeel") / mean_nodes(easy, "peel");
    const double gain_hard = mean_nodes(hard, "nopeel") / mean_nodes(hard, "peel");
    v.pass = gain_hard >= gain_easy;
    v.detail = "node gain (nopeel/peel) rho=0.1: " + fmt("%.3f", gain_easy) +
               ", rho=0.6: " + fmt("%.3f", gain_hard) + " (mean nodes " +
               fmt("%.1f", mean_nodes(easy, "nopeel")) + " vs " +
               fmt("%.1f", mean_nodes(hard, "nopeel")) + " without peeling; peel/nopeel " +
               fmt("%.3f", 1.0 / gain_easy) + " vs " + fmt("%.3f", 1.0 / gain_hard) + "), " +
               fmt("%.1f s", seconds_since(t0));
  } catch (const SafetyViolation& e) {
    v.pass = false;
    v.detail = std::string("safety violation: ") + e.what();
  }
  return v;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Verdict determinism() {
  SweepSpec spec = desk_spec(0.1, {1.0, 3.0}, 9001);
  spec.base.m = 20;
  spec.base.n = 25;
  spec.trials = 3;
  const auto dir = std::filesystem::temp_directory_path();
  const auto a = dir / "l0peel_accept_a.csv";
  const auto b = dir / "l0peel_accept_b.csv";
  run_sweep(spec, a);
  run_sweep(spec, b);
  const bool raw = slurp(a) == slurp(b) && !slurp(a).empty();
  const bool summary = slurp(summary_path(a)) == slurp(summary_path(b));
  for (const auto& p : {a, b}) {
    std::filesystem::remove(p);
    std::filesystem::remove(summary_path(p));
    std::filesystem::remove(timing_path(p));
  }
  Verdict v;
  v.pass = raw && summary;
  v.detail = std::string("raw CSV ") + (raw ? "identical" : "differs") + ", summary CSV " +
             (summary ? "identical" : "differs");
  return v;
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const char* name, const Verdict& v) {
    std::printf("%s  %2d  %-28s %s\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str());
    std::fflush(stdout);
    if (!v.pass) ++failed;
  };

  const SmallSuite small = run_small_suite();
  report(1, "exactness", exactness(small));
  report(2, "peeling safety", peeling_safety(small));
  report(3, "certificate validity", certificate_validity());
  report(4, "weak duality", weak_duality());
  report(5, "conjugate lemmas", conjugates());
  report(6, "relaxation solver", relaxation_solver());
  SweepResult easy;
  report(7, "node-count direction", node_count_direction(easy));
  report(8, "hardness trend", hardness_trend());
  report(9, "big-M calibration", calibration(small));
  report(10, "determinism", determinism());

  std::printf("%d of 10 criteria failed\n", failed);
  return failed;
}
