#include <benchmark/benchmark.h>

#include "sarpomcp/planner.hpp"

namespace {

using namespace sar;

void BM_PlanSmall(benchmark::State& state) {
  const GridMap map = make_environment(EnvironmentFamily::Small);
  const CostTable costs = compute_costs(map);
  const Model model(map, costs, ModelParams{});
  PlannerConfig config;
  config.num_samples = 1000;
  config.exploration_strategy = static_cast<ExplorationStrategy>(state.range(0));
  Planner planner(model, config);
  const Belief root = initial_belief(map);
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(planner.plan(root, TargetSet{}, rng));
  state.SetLabel(std::string(to_string(config.exploration_strategy)));
}
BENCHMARK(BM_PlanSmall)->DenseRange(0, 5)->Unit(benchmark::kMillisecond);

void BM_PlanBuildingFilter(benchmark::State& state) {
  const GridMap map = make_environment(EnvironmentFamily::Building);
  const CostTable costs = compute_costs(map);
  const Model model(map, costs, ModelParams{});
  PlannerConfig config;
  config.num_samples = 100;
  config.max_depth = 30;
  config.exploration_strategy = ExplorationStrategy::EndTreeEntropy;
  config.rollout_policy = RolloutPolicy::MostProbable;
  config.belief_filter = state.range(0) == 0 ? FilterKind::Truncated : FilterKind::Complete;
  Planner planner(model, config);
  const Belief root = initial_belief(map);
  Rng rng(2);
  for (auto _ : state) benchmark::DoNotOptimize(planner.plan(root, TargetSet{}, rng));
  state.SetLabel(std::string(to_string(config.belief_filter)));
}
BENCHMARK(BM_PlanBuildingFilter)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
