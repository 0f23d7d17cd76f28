#include <benchmark/benchmark.h>

#include <cmath>

#include "pvsc/cost.hpp"
#include "pvsc/hjb.hpp"
#include "pvsc/policy.hpp"
#include "pvsc/presets.hpp"
#include "pvsc/rng.hpp"
#include "pvsc/stochastic.hpp"

namespace {

using namespace pvsc;

void BM_OuStepExact(benchmark::State& state) {
  const ModelConfig config = presets::it2023_single_battery();
  const std::array<OuParams, 3> params{config.price_ou, config.demand_ou,
                                       config.pv_ou};
  std::array<double, 3> u{0.0, 0.0, 0.1};
  NormalSampler normal(1);
  for (auto _ : state) {
    const std::array<double, 3> z{normal(), normal(), normal()};
    u = ou_step_exact(u, params, config.noise_corr, 0.024, z);
    benchmark::DoNotOptimize(u);
  }
}
BENCHMARK(BM_OuStepExact);

void BM_AnalyticPolicy(benchmark::State& state) {
  const ModelConfig config = presets::it2023_two_battery();
  double vs = -250.0;
  for (auto _ : state) {
    const PolicyDecision dec =
        analytic_policy(12.0, 0.45, 0.21, 180.0, vs, 0.03, config);
    benchmark::DoNotOptimize(dec);
    vs = vs < -1.0 ? vs + 0.01 : -250.0;
  }
}
BENCHMARK(BM_AnalyticPolicy);

void BM_BruteForcePolicy(benchmark::State& state) {
  const ModelConfig config = presets::it2023_two_battery();
  const int grid_n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const ControlAction action =
        brute_force_policy(12.0, 0.45, 0.21, 180.0, -250.0, 0.03, config, grid_n);
    benchmark::DoNotOptimize(action);
  }
}
BENCHMARK(BM_BruteForcePolicy)->Arg(51)->Arg(201);

// One production-size backward solve (1001 x 31 x 13 nodes).
void BM_HjbSolveProductionGrid(benchmark::State& state) {
  const ModelConfig config = presets::it2023_two_battery();
  const SolverGrid grid = presets::default_grid(config);
  for (auto _ : state) {
    const Solution sol = solve(config, grid);
    benchmark::DoNotOptimize(sol.value.values.data());
  }
}
BENCHMARK(BM_HjbSolveProductionGrid)->Unit(benchmark::kMillisecond);

void BM_McCost(benchmark::State& state) {
  const ModelConfig config = presets::it2023_two_battery();
  const SolverGrid grid = presets::default_grid(config);
  const Solution sol = solve(config, grid);
  const PolicyFunction policy = lattice_policy(sol.policy, config);
  const TimeGrid mc_grid{0.0, grid.time_step, grid.n_t};
  const int paths = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const McResult result =
        mc_cost(0.0, 0.0, 0.0, 0.0, 0.0, policy, config, mc_grid, paths, 42);
    benchmark::DoNotOptimize(result.mean);
  }
}
BENCHMARK(BM_McCost)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
