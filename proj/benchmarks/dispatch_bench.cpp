#include <benchmark/benchmark.h>

#include "socdispatch/cost.hpp"
#include "socdispatch/dispatch.hpp"
#include "socdispatch/lp.hpp"
#include "socdispatch/oracle.hpp"

using namespace socdispatch;

namespace {

// Deterministic synthetic case: one generator and one two-segment storage
// per bus, one congested line between the first two buses.
Case bench_case(int num_buses, int horizon) {
  Case c;
  c.network.num_buses = num_buses;
  c.horizon = horizon;
  c.demand.assign(num_buses, std::vector<double>(horizon, 0.0));
  for (int i = 0; i < num_buses; ++i)
    for (int t = 0; t < horizon; ++t)
      c.demand[i][t] = 2.0 + ((i * 7 + t * 3) % 5);

  for (int i = 0; i < num_buses; ++i) {
    Generator gen;
    gen.blocks = {{8.0, 4.0 + i}, {8.0, 9.0 + i}};
    c.generators[i] = std::move(gen);

    BidCurve bid;
    bid.boundaries = {0.0, 4.0, 8.0};
    bid.charge_benefits = {3.0, 2.0};
    bid.discharge_costs = {8.0, 7.0};
    c.storages[i] = make_asset(bid, 1.0, 1.0, 3.0, 3.0, 2.0);
  }

  if (num_buses > 1) {
    std::vector<double> row(num_buses, 0.0);
    row[0] = 0.5;
    row[1] = -0.5;
    std::vector<double> neg(num_buses, 0.0);
    neg[0] = -0.5;
    neg[1] = 0.5;
    c.network.shift_factors = {row, neg};
    c.network.branch_limits = {6.0, 6.0};
  }
  return c;
}

void BM_BuildDispatchLp(benchmark::State& state) {
  const Case c = bench_case(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(build_dispatch_lp(c));
}

void BM_SolveDispatch(benchmark::State& state) {
  const Case c = bench_case(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_dispatch(c));
}

void BM_SolveLpOnly(benchmark::State& state) {
  const Case c = bench_case(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const DispatchLp built = build_dispatch_lp(c);
  for (auto _ : state) benchmark::DoNotOptimize(solve_lp(built.lp));
}

void BM_TrajectoryCost(benchmark::State& state) {
  const StorageAsset asset = random_edcr_asset(7);
  const Trajectory traj = random_feasible_trajectory(asset, 8, 11);
  for (auto _ : state) benchmark::DoNotOptimize(trajectory_cost(traj, asset));
}

void BM_ConvexHorizonCost(benchmark::State& state) {
  const StorageAsset asset = random_edcr_asset(7);
  for (auto _ : state)
    benchmark::DoNotOptimize(convex_horizon_cost(3.5, 2.25, asset.initial_soc, asset));
}

void BM_EquivalenceSweep(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(run_theorem1_sweep(static_cast<int>(state.range(0)), 42));
}

void BM_BruteForceDispatch(benchmark::State& state) {
  Case c;
  c.network.num_buses = 1;
  c.horizon = 2;
  c.demand = {{0.0, 10.0}};
  c.generators[0].blocks = {{8.0, 5.0}};
  BidCurve bid;
  bid.boundaries = {0.0, 10.0};
  bid.charge_benefits = {1.0};
  bid.discharge_costs = {2.0};
  c.storages[0] = make_asset(bid, 1.0, 1.0, 10.0, 10.0, 0.0);
  const GridSpec grid{static_cast<int>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_dispatch(c, grid));
}

}  // namespace

BENCHMARK(BM_BuildDispatchLp)->Args({1, 4})->Args({3, 6})->Args({5, 12});
BENCHMARK(BM_SolveDispatch)->Args({1, 4})->Args({3, 6})->Args({5, 12});
BENCHMARK(BM_SolveLpOnly)->Args({3, 6})->Args({5, 12});
BENCHMARK(BM_TrajectoryCost);
BENCHMARK(BM_ConvexHorizonCost);
BENCHMARK(BM_EquivalenceSweep)->Arg(100);
BENCHMARK(BM_BruteForceDispatch)->Arg(10)->Arg(20);
