#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sarpomcp/grid_world.hpp"
#include "sarpomcp/planner.hpp"
#include "sarpomcp/pomdp_model.hpp"

namespace sar {

struct ExperimentConfig {
  EnvironmentFamily environment = EnvironmentFamily::Small;
  std::uint64_t env_seed = 0;
  /// When non-empty, the map is loaded from this file instead of being generated.
  std::string map_file;
  ModelParams model;
  PlannerConfig planner;
  int trials = 100;
  std::uint64_t master_seed = 1;

  /// Throws ConfigError when a field is out of range.
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Episode cap used when a config does not set one: 16 for SE, 40 for LE, CE
/// and BUILDING, 150 for RANDOM.
int default_max_steps(EnvironmentFamily family);

/// Total order used to sort sweep output.
bool config_less(const ExperimentConfig& a, const ExperimentConfig& b);

/// Map and cost table for one configuration. Heap-allocated so that models
/// referencing it stay valid when the handle moves.
struct Environment {
  GridMap map;
  CostTable costs;
};

std::shared_ptr<const Environment> build_environment(const ExperimentConfig& config);
std::shared_ptr<const Environment> build_environment(GridMap map);

struct TrialResult {
  bool success = false;
  int steps = 0;
  int responder_observations = 0;
  double cumulative_reward = 0.0;
  /// Seconds spent inside plan() calls.
  double wall_time = 0.0;
  std::uint64_t seed = 0;
  int regenerations = 0;
  /// Non-empty when the trial aborted with an exception.
  std::string error;
};

struct AggregateResult {
  int trials = 0;
  double success_rate = 0.0;
  double mean_steps = 0.0;
  long total_steps = 0;
  long total_robs = 0;
  double total_reward = 0.0;
  double total_time_s = 0.0;
  double reward_per_time = 0.0;
  int failed_trials = 0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<TrialResult> trials;
  AggregateResult aggregate;
  /// Set when the configuration could not run at all.
  std::string error;
};

/// One episode: sample the hidden state from the initial belief, then plan,
/// act, observe and filter until the target is found or max_steps elapse.
/// Throws with the trial seed in the message when planning or filtering fails.
TrialResult run_trial(const ExperimentConfig& config, const Environment& env, std::uint64_t trial_seed);
TrialResult run_trial(const ExperimentConfig& config, std::uint64_t trial_seed);

/// Failed and errored trials count max_steps toward the mean.
AggregateResult aggregate(std::span<const TrialResult> trials, int max_steps);

/// Runs trials with seeds master_seed + i. Per-trial exceptions are recorded
/// in TrialResult::error and counted in failed_trials.
ExperimentResult run_experiment(const ExperimentConfig& config, int threads = 1);

/// Runs every configuration and returns results sorted by config_less.
/// A configuration that cannot run is reported through ExperimentResult::error.
std::vector<ExperimentResult> sweep(std::vector<ExperimentConfig> configs, int threads = 1);

void write_csv(std::ostream& out, std::span<const ExperimentResult> results);
void write_trials_csv(std::ostream& out, std::span<const ExperimentResult> results);

/// Calls fn(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace sar
