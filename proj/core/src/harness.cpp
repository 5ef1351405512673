#include "sarpomcp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>
#include <tuple>

#include "sarpomcp/belief.hpp"
#include "sarpomcp/errors.hpp"
#include "sarpomcp/map_io.hpp"

namespace sar {
namespace {

auto config_key(const ExperimentConfig& c) {
  const PlannerConfig& p = c.planner;
  return std::make_tuple(to_string(c.environment), c.env_seed, std::cref(c.map_file), c.model.p_still,
                         c.model.max_steps, c.model.terminal_radius, p.num_samples, p.max_depth, p.ucb_c, p.gamma,
                         to_string(p.exploration_strategy), to_string(p.entropy_mode), p.entropy_coeff, p.rr_bonus,
                         to_string(p.rollout_policy), to_string(p.rollout_action_mode), to_string(p.belief_filter),
                         p.truncation_size, c.trials, c.master_seed);
}

void write_config_fields(std::ostream& out, const ExperimentConfig& c) {
  const PlannerConfig& p = c.planner;
  out << to_string(c.environment) << ',' << c.env_seed << ',' << c.map_file << ',' << c.trials << ','
      << c.master_seed << ',' << c.model.p_still << ',' << c.model.max_steps << ',' << c.model.terminal_radius << ','
      << p.num_samples << ',' << p.max_depth << ',' << p.ucb_c << ',' << p.gamma << ','
      << to_string(p.exploration_strategy) << ',' << to_string(p.entropy_mode) << ',' << p.entropy_coeff << ','
      << p.rr_bonus << ',' << to_string(p.rollout_policy) << ',' << to_string(p.rollout_action_mode) << ','
      << to_string(p.belief_filter) << ',' << p.truncation_size;
}

constexpr const char* kConfigHeader =
    "environment,env_seed,map_file,trials,master_seed,p_still,max_steps,terminal_radius,num_samples,max_depth,"
    "ucb_c,gamma,exploration_strategy,entropy_mode,entropy_coeff,rr_bonus,rollout_policy,rollout_action_mode,"
    "belief_filter,truncation_size";

TrialResult run_episode(const ExperimentConfig& config, const Environment& env, std::uint64_t trial_seed) {
  const Model model(env.map, env.costs, config.model);
  const GridMap& map = env.map;
  BeliefFilter filter(model);
  Planner planner(model, config.planner);

  std::seed_seq world_seq{trial_seed, std::uint64_t{0}};
  std::seed_seq planner_seq{trial_seed, std::uint64_t{1}};
  Rng world(world_seq);
  Rng planner_rng(planner_seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  TrialResult result;
  result.seed = trial_seed;

  Belief belief = initial_belief(map);
  State truth = belief.sample(unit(world));
  if (model.is_terminal(truth)) {
    result.success = true;
    return result;
  }

  TargetSet visited;
  visited.insert(map.target_index(truth.drone));
  {
    UpdateResult first = filter.update(belief, model.observe(truth));
    belief = std::get<Belief>(std::move(first));
  }
  SightingRecord sighting = SightingRecord::from_prior(belief, map);

  const auto& pc = config.planner;
  for (int t = 1; t <= config.model.max_steps; ++t) {
    const auto start = std::chrono::steady_clock::now();
    const Action a = planner.plan(belief, visited, planner_rng);
    result.wall_time += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const State next = model.transition(truth, a, world);
    const Observation obs = model.observe(next);
    result.cumulative_reward += model.reward(truth, a, next);
    truth = next;
    if (model.is_terminal(next)) {
      result.success = true;
      result.steps = t;
      return result;
    }

    if (obs.responder_seen) ++result.responder_observations;
    visited.insert(map.target_index(obs.drone));

    UpdateResult updated = filter.update(filter.predict(belief, a), obs);
    if (auto* posterior = std::get_if<Belief>(&updated)) {
      belief = std::move(*posterior);
    } else {
      const auto& signal = std::get<InconsistentObservation>(updated);
      ++result.regenerations;
      switch (signal.kind) {
        case InconsistencyKind::UnexpectedResponder:
          belief = regenerate_unexpected_responder(sighting, obs.drone, map, env.costs, visited);
          break;
        case InconsistencyKind::EmptyTarget:
        case InconsistencyKind::MissingResponder:
          belief = regenerate_empty_target(sighting, model, visited, obs.drone, t);
          break;
        case InconsistencyKind::UnexpectedTarget:
          throw EpisodeLogicError("target observed in a non-terminal state");
      }
    }
    if (pc.belief_filter == FilterKind::Truncated) {
      belief = truncate(belief, static_cast<std::size_t>(pc.truncation_size));
    }
    if (obs.responder_seen) {
      sighting.responder_cell = obs.drone;
      sighting.time = t;
      sighting.target_probabilities = filter.target_marginal(belief);
    }
  }
  result.steps = config.model.max_steps;
  return result;
}

}  // namespace

void ExperimentConfig::validate() const {
  model.validate();
  planner.validate();
  if (trials < 1) throw ConfigError("trials must be at least 1");
}

int default_max_steps(EnvironmentFamily family) {
  switch (family) {
    case EnvironmentFamily::Small: return 16;
    case EnvironmentFamily::Large:
    case EnvironmentFamily::Cross:
    case EnvironmentFamily::Building: return 40;
    case EnvironmentFamily::Random: return 150;
  }
  return 40;
}

bool config_less(const ExperimentConfig& a, const ExperimentConfig& b) { return config_key(a) < config_key(b); }

std::shared_ptr<const Environment> build_environment(GridMap map) {
  CostTable costs = compute_costs(map);
  return std::make_shared<const Environment>(Environment{std::move(map), std::move(costs)});
}

std::shared_ptr<const Environment> build_environment(const ExperimentConfig& config) {
  if (!config.map_file.empty()) return build_environment(load_map(config.map_file));
  return build_environment(make_environment(config.environment, config.env_seed));
}

TrialResult run_trial(const ExperimentConfig& config, const Environment& env, std::uint64_t trial_seed) {
  config.validate();
  try {
    return run_episode(config, env, trial_seed);
  } catch (const std::exception& e) {
    throw std::runtime_error("trial seed " + std::to_string(trial_seed) + ": " + e.what());
  }
}

TrialResult run_trial(const ExperimentConfig& config, std::uint64_t trial_seed) {
  const auto env = build_environment(config);
  return run_trial(config, *env, trial_seed);
}

AggregateResult aggregate(std::span<const TrialResult> trials, int max_steps) {
  AggregateResult agg;
  agg.trials = static_cast<int>(trials.size());
  int successes = 0;
  for (const TrialResult& t : trials) {
    const bool ok = t.error.empty() && t.success;
    if (!t.error.empty()) ++agg.failed_trials;
    if (ok) ++successes;
    agg.total_steps += ok ? t.steps : max_steps;
    agg.total_robs += t.responder_observations;
    agg.total_reward += t.cumulative_reward;
    agg.total_time_s += t.wall_time;
  }
  if (agg.trials > 0) {
    agg.success_rate = static_cast<double>(successes) / agg.trials;
    agg.mean_steps = static_cast<double>(agg.total_steps) / agg.trials;
  }
  agg.reward_per_time = agg.total_time_s > 0.0 ? agg.total_reward / agg.total_time_s : 0.0;
  return agg;
}

ExperimentResult run_experiment(const ExperimentConfig& config, int threads) {
  config.validate();
  const auto env = build_environment(config);
  ExperimentResult result;
  result.config = config;
  result.trials.resize(static_cast<std::size_t>(config.trials));
  parallel_for(result.trials.size(), threads, [&](std::size_t i) {
    const std::uint64_t seed = config.master_seed + i;
    try {
      result.trials[i] = run_trial(config, *env, seed);
    } catch (const std::exception& e) {
      result.trials[i] = TrialResult{};
      result.trials[i].seed = seed;
      result.trials[i].steps = config.model.max_steps;
      result.trials[i].error = e.what();
    }
  });
  result.aggregate = aggregate(result.trials, config.model.max_steps);
  return result;
}

std::vector<ExperimentResult> sweep(std::vector<ExperimentConfig> configs, int threads) {
  if (configs.empty()) throw ConfigError("sweep needs at least one configuration");
  std::stable_sort(configs.begin(), configs.end(), config_less);
  std::vector<ExperimentResult> results(configs.size());
  parallel_for(configs.size(), threads, [&](std::size_t i) {
    try {
      results[i] = run_experiment(configs[i], 1);
    } catch (const std::exception& e) {
      results[i] = ExperimentResult{};
      results[i].config = configs[i];
      results[i].error = e.what();
    }
  });
  return results;
}

void write_csv(std::ostream& out, std::span<const ExperimentResult> results) {
  out << kConfigHeader << ",success_rate,mean_steps,total_robs,total_reward,total_time_s,reward_per_time,"
      << "failed_trials,error\n";
  for (const ExperimentResult& r : results) {
    write_config_fields(out, r.config);
    const AggregateResult& a = r.aggregate;
    out << ',' << a.success_rate << ',' << a.mean_steps << ',' << a.total_robs << ',' << a.total_reward << ','
        << a.total_time_s << ',' << a.reward_per_time << ',' << a.failed_trials << ',';
    std::string error = r.error;
    std::replace(error.begin(), error.end(), ',', ';');
    std::replace(error.begin(), error.end(), '\n', ' ');
    out << error << '\n';
  }
}

void write_trials_csv(std::ostream& out, std::span<const ExperimentResult> results) {
  out << kConfigHeader << ",seed,success,steps,responder_observations,cumulative_reward,wall_time_s,regenerations\n";
  for (const ExperimentResult& r : results) {
    for (const TrialResult& t : r.trials) {
      write_config_fields(out, r.config);
      out << ',' << t.seed << ',' << (t.success ? 1 : 0) << ',' << t.steps << ',' << t.responder_observations << ','
          << t.cumulative_reward << ',' << t.wall_time << ',' << t.regenerations << '\n';
    }
  }
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace sar
