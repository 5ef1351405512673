#include <benchmark/benchmark.h>

#include "sarpomcp/belief.hpp"
#include "sarpomcp/grid_world.hpp"

namespace {

using namespace sar;

EnvironmentFamily family(int index) {
  constexpr EnvironmentFamily kFamilies[] = {EnvironmentFamily::Small, EnvironmentFamily::Large,
                                             EnvironmentFamily::Cross, EnvironmentFamily::Building};
  return kFamilies[index];
}

// A belief that has spread for a few steps, closer to what the planner sees mid-episode.
Belief spread_belief(BeliefFilter& filter, const GridMap& map, int steps) {
  Belief b = initial_belief(map);
  for (int i = 0; i < steps; ++i) {
    const Belief predicted = filter.predict(b, Action::Stay);
    b = std::get<Belief>(filter.update(predicted, Observation{map.drone_start_cell(), false, false}));
  }
  return b;
}

void BM_PredictUpdate(benchmark::State& state) {
  const GridMap map = make_environment(family(static_cast<int>(state.range(0))));
  const CostTable costs = compute_costs(map);
  const Model model(map, costs, ModelParams{});
  BeliefFilter filter(model);
  const Belief b = spread_belief(filter, map, 5);
  for (auto _ : state) {
    const Belief predicted = filter.predict(b, Action::Stay);
    benchmark::DoNotOptimize(filter.update(predicted, Observation{map.drone_start_cell(), false, false}));
  }
  state.counters["states"] = static_cast<double>(b.size());
  state.SetLabel(std::string(to_string(family(static_cast<int>(state.range(0))))));
}
BENCHMARK(BM_PredictUpdate)->DenseRange(0, 3);

void BM_Entropy(benchmark::State& state) {
  const GridMap map = make_environment(EnvironmentFamily::Building);
  const CostTable costs = compute_costs(map);
  const Model model(map, costs, ModelParams{});
  BeliefFilter filter(model);
  const Belief b = spread_belief(filter, map, 5);
  const auto mode = state.range(0) == 0 ? EntropyMode::Goal : EntropyMode::Full;
  for (auto _ : state) benchmark::DoNotOptimize(filter.entropy(b, mode));
  state.SetLabel(std::string(to_string(mode)));
}
BENCHMARK(BM_Entropy)->Arg(0)->Arg(1);

void BM_Truncate(benchmark::State& state) {
  const GridMap map = make_environment(EnvironmentFamily::Building);
  const CostTable costs = compute_costs(map);
  const Model model(map, costs, ModelParams{});
  BeliefFilter filter(model);
  const Belief b = spread_belief(filter, map, 5);
  for (auto _ : state) benchmark::DoNotOptimize(truncate(b, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_Truncate)->Arg(20)->Arg(200);

void BM_CostTable(benchmark::State& state) {
  const GridMap map = make_environment(EnvironmentFamily::Random, 7);
  for (auto _ : state) benchmark::DoNotOptimize(compute_costs(map));
}
BENCHMARK(BM_CostTable)->Unit(benchmark::kMillisecond);

}  // namespace
