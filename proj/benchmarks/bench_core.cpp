#include <benchmark/benchmark.h>

#include "trapkit/dynamics.hpp"
#include "trapkit/explore.hpp"
#include "trapkit/green.hpp"
#include "trapkit/limits.hpp"

using namespace trapkit;

namespace {

void BM_TimeChangedWalk(benchmark::State& state) {
  EnvParams p;
  const Environment env(p);
  const auto steps = static_cast<std::size_t>(state.range(0));
  std::uint64_t rep = 0;
  for (auto _ : state) {
    WalkStreams st = WalkStreams::derived(1, rep++);
    auto w = simulate_time_changed_walk(env, DynamicsSpec::bouchaud(0.3), StopRule::steps(steps), st);
    benchmark::DoNotOptimize(w.clock.total());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TimeChangedWalk)->Arg(10000)->Arg(100000);

void BM_Discovery(benchmark::State& state) {
  EnvParams p;
  const Environment env(p);
  WalkStreams st = WalkStreams::derived(2, 0);
  const auto w = simulate_time_changed_walk(env, DynamicsSpec::bouchaud(0.3), StopRule::steps(100000), st);
  for (auto _ : state) {
    auto ds = discovery_sequence(w.path);
    benchmark::DoNotOptimize(ds.size());
  }
}
BENCHMARK(BM_Discovery);

void BM_GreenBox(benchmark::State& state) {
  EnvParams p;
  const Environment env(p);
  const int n = static_cast<int>(state.range(0));
  const EnvWindow w = env.window(Site::origin(), n + 1, false);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_green_box(w, n, DynamicsSpec::bouchaud(0.3)).value);
  }
}
BENCHMARK(BM_GreenBox)->Arg(1)->Arg(2)->Arg(3);

void BM_PositiveStable(benchmark::State& state) {
  RngStream rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(positive_stable(0.5, rng));
}
BENCHMARK(BM_PositiveStable);

void BM_StableSubordinator(benchmark::State& state) {
  std::vector<double> grid;
  for (int i = 0; i <= 1000; ++i) grid.push_back(i * 1e-3);
  RngStream rng(4);
  for (auto _ : state) benchmark::DoNotOptimize(sample_stable_subordinator(0.5, 1.0, grid, rng).v.back());
}
BENCHMARK(BM_StableSubordinator);

}  // namespace

BENCHMARK_MAIN();
