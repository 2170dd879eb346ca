#include <benchmark/benchmark.h>

#include <random>

#include "didcnc/oracle.hpp"
#include "didcnc/routing.hpp"
#include "didcnc/simulator.hpp"
#include "fixtures.hpp"

namespace {

using namespace didcnc;

VirtualQueueState loaded_grid_queues(const Scenario& s) {
  std::mt19937_64 rng(1);
  return testing::random_queues(s, rng, 200, 0.2);
}

void BM_MinStarGrid(benchmark::State& state) {
  const Scenario s = default_grid_scenario();
  const AugmentedLayeredGraph alg(s.graph, s.clients[3].service);
  const VirtualQueueState q = loaded_grid_queues(s);
  for (auto _ : state) benchmark::DoNotOptimize(min_star(alg, s.clients[3], q));
}
BENCHMARK(BM_MinStarGrid);

void BM_SelectRouteGrid(benchmark::State& state) {
  const Scenario s = default_grid_scenario();
  const auto policy = static_cast<Policy>(state.range(0));
  const AugmentedLayeredGraph alg(s.graph, s.clients[0].service);
  const VirtualQueueState q = loaded_grid_queues(s);
  for (auto _ : state) benchmark::DoNotOptimize(select_route(policy, alg, s.clients[0], q));
  state.SetLabel(std::string(policy_name(policy)));
}
BENCHMARK(BM_SelectRouteGrid)->DenseRange(0, 2);

void BM_BruteForceSmall(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const Scenario s = testing::random_small_scenario(rng, 5, 2);
  const AugmentedLayeredGraph alg(s.graph, s.clients[0].service);
  const VirtualQueueState q = testing::random_queues(s, rng);
  for (auto _ : state) {
    try {
      benchmark::DoNotOptimize(brute_force_min_star(alg, s.clients[0], q));
    } catch (const InfeasibleRoute&) {
    }
  }
}
BENCHMARK(BM_BruteForceSmall);

void BM_EngineSlot(benchmark::State& state) {
  Scenario s = default_grid_scenario();
  for (ClientSpec& c : s.clients) c.arrival_rate = static_cast<double>(state.range(0));
  s.slot_count = 1 << 30;
  Engine engine(s);
  for (int t = 0; t < 2000; ++t) engine.step();
  for (auto _ : state) engine.step();
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_EngineSlot)->Arg(4)->Arg(12);

void BM_FlowLpGrid(benchmark::State& state) {
  Scenario s = default_grid_scenario();
  for (ClientSpec& c : s.clients) c.arrival_rate = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(max_throughput_lp(s, false));
}
BENCHMARK(BM_FlowLpGrid)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
