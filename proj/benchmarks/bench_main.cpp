#include <benchmark/benchmark.h>

#include "dlharmonic/boundary_analysis.hpp"
#include "dlharmonic/monte_carlo.hpp"

using namespace dlh;

namespace {

TreeWalk drift04() { return TreeWalk(2, {{{0, 1}, 0.7}, {{1, 0}, 0.3}}); }

void BM_Confluent(benchmark::State& state) {
  const auto depth = state.range(0);
  TreeVertex x, y;
  for (std::int64_t i = 0; i < depth; ++i) {
    x.move_down(static_cast<Symbol>(i % 2));
    y.move_down(static_cast<Symbol>((i / 3) % 2));
  }
  for (auto _ : state) benchmark::DoNotOptimize(confluent(x, y));
}
BENCHMARK(BM_Confluent)->Arg(16)->Arg(256)->Arg(4096);

void BM_SolveCoefficients(benchmark::State& state) {
  const TreeWalk w(3, {{{0, 1}, 0.5}, {{1, 0}, 0.2}, {{1, 1}, 0.1}, {{2, 1}, 0.1}, {{0, 2}, 0.1}});
  SolverOptions opt;
  opt.truncation = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_coefficients(w, opt));
}
BENCHMARK(BM_SolveCoefficients)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_SolveZeroDrift(benchmark::State& state) {
  const TreeWalk w(2, {{{0, 1}, 0.5}, {{1, 0}, 0.5}});
  for (auto _ : state) benchmark::DoNotOptimize(solve_coefficients(w));
}
BENCHMARK(BM_SolveZeroDrift)->Unit(benchmark::kMillisecond);

void BM_TreeSteps(benchmark::State& state) {
  const auto w = drift04();
  for (auto _ : state) {
    std::int64_t h = 0;
    simulate(w, TreeVertex{}, 10'000, 1, [&h](std::uint64_t, const TreeVertex& z) { h = z.hor(); });
    benchmark::DoNotOptimize(h);
  }
  state.SetItemsProcessed(state.iterations() * 10'000);
}
BENCHMARK(BM_TreeSteps)->Unit(benchmark::kMillisecond);

void BM_DLSteps(benchmark::State& state) {
  const auto w = switch_walk(ZWalk({{2, 0.5}, {-1, 0.5}}), 2, 3);
  for (auto _ : state) {
    std::int64_t h = 0;
    simulate(w, dl_root(), 10'000, 1, [&h](std::uint64_t, const DLVertex& z) { h = z.pos; });
    benchmark::DoNotOptimize(h);
  }
  state.SetItemsProcessed(state.iterations() * 10'000);
}
BENCHMARK(BM_DLSteps)->Unit(benchmark::kMillisecond);

void BM_BoundaryCoefficientsMC(benchmark::State& state) {
  const auto w = drift04();
  TrajectoryParams p;
  p.seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(estimate_boundary_coefficients(w, 10'000, 10, p));
  state.SetItemsProcessed(state.iterations() * 10'000);
}
BENCHMARK(BM_BoundaryCoefficientsMC)->Unit(benchmark::kMillisecond);

void BM_GreenTable(benchmark::State& state) {
  const auto w = drift04();
  const auto n = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(GreenTable(w, n));
}
BENCHMARK(BM_GreenTable)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

void BM_ClassCollapsedDL(benchmark::State& state) {
  const auto w = switch_walk(ZWalk({{1, 0.7}, {-1, 0.3}}), 2, 2);
  for (auto _ : state) {
    TreePairCounter c1(2), c2(2);
    auto d = initial_dl_distribution();
    for (int n = 0; n < state.range(0); ++n) d = class_collapsed_step(w, d, c1, c2);
    benchmark::DoNotOptimize(d.table.size());
  }
}
BENCHMARK(BM_ClassCollapsedDL)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
