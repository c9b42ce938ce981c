#include <benchmark/benchmark.h>

#include "l0peel/bnb.hpp"
#include "l0peel/dual.hpp"
#include "l0peel/peel.hpp"
#include "l0peel/relax.hpp"
#include "l0peel/sweep.hpp"

namespace {

using namespace l0peel;

Trial bench_trial(int m, int n, int k, std::uint64_t seed = 11) {
  ExperimentConfig cfg;
  cfg.m = m;
  cfg.n = n;
  cfg.k = k;
  return make_trial(cfg, seed);
}

BoxBounds bench_box(const Trial& t, double gamma = 2.0) {
  return BoxBounds::big_m(t.instance.n(), gamma * t.truth.x_dagger.cwiseAbs().maxCoeff());
}

void BM_Relaxation(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  const Trial t = bench_trial(n / 2, n, 5);
  const NodePartition node(t.instance.n());
  for (auto _ : state) {
    BoxBounds box = bench_box(t);
    benchmark::DoNotOptimize(solve_relaxation(t.instance, node, box).value);
  }
}
BENCHMARK(BM_Relaxation)->Arg(50)->Arg(100)->Arg(200);

void BM_DualValue(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  const Trial t = bench_trial(n / 2, n, 5);
  const NodePartition node(t.instance.n());
  const BoxBounds box = bench_box(t);
  const Vector w = t.instance.y();
  const Vector corr = t.instance.A().transpose() * w;
  for (auto _ : state) {
    benchmark::DoNotOptimize(dual_value(w, corr, node, box, t.instance));
  }
}
BENCHMARK(BM_DualValue)->Arg(100)->Arg(1000);

void BM_PeelAll(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  const Trial t = bench_trial(n / 2, n, 5);
  const NodePartition node(t.instance.n());
  const BoxBounds box = bench_box(t);
  const Vector w = t.instance.y();
  const Vector corr = t.instance.A().transpose() * w;
  const double D = dual_value(w, corr, node, box, t.instance);
  const double p_bar = t.instance.half_sq_norm_y();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        peel_all(node, corr, D, p_bar, box, t.instance.lambda(), 1e-16).fired());
  }
}
BENCHMARK(BM_PeelAll)->Arg(100)->Arg(1000);

void BM_Solve(benchmark::State& state) {
  const Trial t = bench_trial(20, 30, 3);
  const BoxBounds box = bench_box(t);
  SolverConfig cfg;
  cfg.peeling = state.range(0) != 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve(t.instance, box, cfg).p_star);
  }
}
BENCHMARK(BM_Solve)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
