#include "sarpomcp/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sarpomcp/errors.hpp"

namespace sar {
namespace {

template <typename Enum, std::size_t N>
Enum parse_named(std::string_view name, const std::array<Enum, N>& values, const char* what) {
  for (Enum v : values) {
    if (to_string(v) == name) return v;
  }
  throw std::invalid_argument(std::string("unknown ") + what + ": " + std::string(name));
}

// Index drawn from non-negative weights with total `total` > 0.
int draw_index(std::span<const double> weights, double total, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, total);
  const double u = unit(rng);
  double acc = 0.0;
  int last = -1;
  for (int i = 0; i < static_cast<int>(weights.size()); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last = i;
    if (u < acc) return i;
  }
  return last;
}

}  // namespace

std::string_view to_string(ExplorationStrategy s) {
  switch (s) {
    case ExplorationStrategy::Default: return "dfES";
    case ExplorationStrategy::ResponderReward: return "rrES";
    case ExplorationStrategy::CompleteEntropy: return "chES";
    case ExplorationStrategy::TreeEntropy: return "thES";
    case ExplorationStrategy::EndTreeEntropy: return "ehES";
    case ExplorationStrategy::FirstStepEntropy: return "fhES";
  }
  return "?";
}

std::string_view to_string(RolloutPolicy p) {
  switch (p) {
    case RolloutPolicy::Random: return "rRS";
    case RolloutPolicy::SampleTarget: return "stRS";
    case RolloutPolicy::NearestTarget: return "dnRS";
    case RolloutPolicy::StochasticNearest: return "snRS";
    case RolloutPolicy::MostProbable: return "dpRS";
    case RolloutPolicy::StochasticProbable: return "spRS";
  }
  return "?";
}

std::string_view to_string(RolloutActionMode m) { return m == RolloutActionMode::Best ? "bRA" : "sRA"; }
std::string_view to_string(FilterKind f) { return f == FilterKind::Complete ? "cF" : "aF"; }

ExplorationStrategy parse_exploration_strategy(std::string_view name) {
  constexpr std::array values = {ExplorationStrategy::Default,          ExplorationStrategy::ResponderReward,
                                 ExplorationStrategy::CompleteEntropy,  ExplorationStrategy::TreeEntropy,
                                 ExplorationStrategy::EndTreeEntropy,   ExplorationStrategy::FirstStepEntropy};
  return parse_named(name, values, "exploration strategy");
}

RolloutPolicy parse_rollout_policy(std::string_view name) {
  constexpr std::array values = {RolloutPolicy::Random,          RolloutPolicy::SampleTarget,
                                 RolloutPolicy::NearestTarget,   RolloutPolicy::StochasticNearest,
                                 RolloutPolicy::MostProbable,    RolloutPolicy::StochasticProbable};
  return parse_named(name, values, "rollout policy");
}

RolloutActionMode parse_rollout_action_mode(std::string_view name) {
  constexpr std::array values = {RolloutActionMode::Best, RolloutActionMode::Stochastic};
  return parse_named(name, values, "rollout action mode");
}

FilterKind parse_filter_kind(std::string_view name) {
  constexpr std::array values = {FilterKind::Complete, FilterKind::Truncated};
  return parse_named(name, values, "belief filter");
}

bool uses_entropy(ExplorationStrategy s) {
  return s == ExplorationStrategy::CompleteEntropy || s == ExplorationStrategy::TreeEntropy ||
         s == ExplorationStrategy::EndTreeEntropy || s == ExplorationStrategy::FirstStepEntropy;
}

void PlannerConfig::validate() const {
  if (num_samples < 1) throw ConfigError("num_samples must be at least 1");
  if (max_depth < 1) throw ConfigError("max_depth must be at least 1");
  if (!(ucb_c >= 0.0)) throw ConfigError("ucb_c must be non-negative");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  if (!(entropy_coeff > 0.0)) throw ConfigError("entropy_coeff must be positive");
  if (!(rr_bonus >= 0.0)) throw ConfigError("rr_bonus must be non-negative");
  if (truncation_size < 1) throw ConfigError("truncation_size must be at least 1");
}

Action ucb_select(const SearchNode& node, double c) {
  for (Action a : kAllActions) {
    if (node.is_legal(a) && node.action_visits[index_of(a)] == 0) return a;
  }
  const double log_n = std::log(static_cast<double>(std::max(node.visits, 1)));
  Action best = Action::Stay;
  double best_score = -std::numeric_limits<double>::infinity();
  for (Action a : kAllActions) {
    if (!node.is_legal(a)) continue;
    const int i = index_of(a);
    const double score = node.action_values[i] + c * std::sqrt(log_n / node.action_visits[i]);
    if (score > best_score) {
      best_score = score;
      best = a;
    }
  }
  return best;
}

CellId select_rollout_target(RolloutPolicy policy, const State& sample, std::span<const double> target_marginal,
                             TargetSet visited, const GridMap& map, const CostTable& costs, Rng& rng) {
  const auto targets = map.target_cells();
  std::array<double, TargetSet::kCapacity> weights{};
  int open = 0;
  for (int g = 0; g < map.target_count(); ++g) {
    if (!visited.contains(g)) ++open;
  }
  if (open == 0) throw EpisodeLogicError("no non-visited target left for the rollout");

  switch (policy) {
    case RolloutPolicy::Random: return kNoCell;
    case RolloutPolicy::SampleTarget: return sample.target;
    case RolloutPolicy::NearestTarget: {
      CellId best = kNoCell;
      int best_cost = std::numeric_limits<int>::max();
      for (int g = 0; g < map.target_count(); ++g) {
        if (visited.contains(g)) continue;
        const int c = costs.cost_to_target(sample.drone, g);
        if (c < best_cost) {
          best_cost = c;
          best = targets[g];
        }
      }
      return best;
    }
    case RolloutPolicy::StochasticNearest: {
      double total = 0.0;
      for (int g = 0; g < map.target_count(); ++g) {
        if (visited.contains(g)) continue;
        weights[g] = 1.0 / (costs.cost_to_target(sample.drone, g) + 1.0);
        total += weights[g];
      }
      return targets[draw_index(std::span(weights).first(map.target_count()), total, rng)];
    }
    case RolloutPolicy::MostProbable: {
      int best = -1;
      for (int g = 0; g < map.target_count(); ++g) {
        if (visited.contains(g)) continue;
        if (best < 0 || target_marginal[g] > target_marginal[best]) best = g;
      }
      return targets[best];
    }
    case RolloutPolicy::StochasticProbable: {
      double total = 0.0;
      for (int g = 0; g < map.target_count(); ++g) {
        if (visited.contains(g)) continue;
        weights[g] = target_marginal[g];
        total += weights[g];
      }
      if (total <= 0.0) {
        for (int g = 0; g < map.target_count(); ++g) weights[g] = visited.contains(g) ? 0.0 : 1.0;
        total = open;
      }
      return targets[draw_index(std::span(weights).first(map.target_count()), total, rng)];
    }
  }
  return kNoCell;
}

std::array<double, kActionCount> stochastic_action_weights(CellId drone, CellId target, const GridMap& map,
                                                           const CostTable& costs) {
  std::array<double, kActionCount> weights{};
  double total = 0.0;
  const std::uint8_t legal = map.legal_actions(drone);
  for (Action a : kAllActions) {
    if (!((legal >> index_of(a)) & 1U)) continue;
    const int c = costs.cost(map.apply(drone, a), target);
    if (c == CostTable::kUnreachable) continue;
    weights[index_of(a)] = 1.0 / (c + 1.0);
    total += weights[index_of(a)];
  }
  for (double& w : weights) w /= total;
  return weights;
}

Action select_rollout_action(RolloutActionMode mode, CellId drone, CellId target, const GridMap& map,
                             const CostTable& costs, Rng& rng) {
  if (target == kNoCell) {
    std::array<Action, kActionCount> options{};
    int count = 0;
    const std::uint8_t legal = map.legal_actions(drone);
    for (Action a : kAllActions) {
      if ((legal >> index_of(a)) & 1U) options[count++] = a;
    }
    std::uniform_int_distribution<int> pick(0, count - 1);
    return options[pick(rng)];
  }
  if (costs.cost(drone, target) == CostTable::kUnreachable) {
    throw EpisodeLogicError("rollout target is unreachable from the drone");
  }
  if (mode == RolloutActionMode::Best) {
    const int g = map.target_index(target);
    return g >= 0 ? costs.best_action(drone, g) : costs.best_action_toward(drone, target);
  }
  const auto weights = stochastic_action_weights(drone, target, map, costs);
  return kAllActions[draw_index(weights, 1.0, rng)];
}

Planner::Planner(const Model& model, PlannerConfig config)
    : model_(&model), config_(config), filter_(model), marginal_(model.map().target_count(), 0.0) {
  config_.validate();
}

bool Planner::tracks_tree_beliefs() const {
  return uses_entropy(config_.exploration_strategy) || config_.rollout_policy == RolloutPolicy::MostProbable ||
         config_.rollout_policy == RolloutPolicy::StochasticProbable;
}

Action Planner::plan(const Belief& root, TargetSet visited, Rng& rng) {
  if (root.empty()) throw EpisodeLogicError("cannot plan from an empty belief");
  const bool all_terminal = std::all_of(root.entries().begin(), root.entries().end(),
                                        [&](const WeightedState& e) { return model_->is_terminal(e.state); });
  if (all_terminal) throw EpisodeLogicError("every state in the root belief is terminal");

  rng_ = &rng;
  stats_ = PlannerStats{};
  tree_.clear();
  tree_.reserve(static_cast<std::size_t>(config_.num_samples) + 1);
  SearchNode& node = tree_.emplace_back();
  node.drone = root.drone();
  node.legal_actions = model_->map().legal_actions(node.drone);
  node.children.fill(SearchNode::kNoChild);
  if (tracks_tree_beliefs()) node.belief = root;

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < config_.num_samples; ++i) {
    const State sample = root.sample(unit(rng));
    iteration_entropy_terms_ = 0;
    simulate(sample, 0, 0, visited);
    if (i == 0) {
      stats_.min_entropy_terms_per_iteration = iteration_entropy_terms_;
      stats_.max_entropy_terms_per_iteration = iteration_entropy_terms_;
    } else {
      stats_.min_entropy_terms_per_iteration = std::min(stats_.min_entropy_terms_per_iteration, iteration_entropy_terms_);
      stats_.max_entropy_terms_per_iteration = std::max(stats_.max_entropy_terms_per_iteration, iteration_entropy_terms_);
    }
    ++stats_.iterations;
  }
  stats_.nodes = tree_.size();
  rng_ = nullptr;

  const SearchNode& r = tree_.front();
  Action best = Action::Stay;
  double best_value = -std::numeric_limits<double>::infinity();
  for (Action a : kAllActions) {
    const int i = index_of(a);
    if (!r.is_legal(a) || r.action_visits[i] == 0) continue;
    if (r.action_values[i] > best_value) {
      best_value = r.action_values[i];
      best = a;
    }
  }
  return best;
}

std::int32_t Planner::expand(std::int32_t parent, Action a, const Observation& obs) {
  SearchNode node;
  node.drone = obs.drone;
  node.legal_actions = model_->map().legal_actions(obs.drone);
  node.children.fill(SearchNode::kNoChild);
  if (tracks_tree_beliefs()) {
    const Belief predicted = filter_.predict(*tree_[parent].belief, a);
    UpdateResult result = filter_.update(predicted, obs);
    if (auto* posterior = std::get_if<Belief>(&result)) {
      node.entropy = filter_.entropy(*posterior, config_.entropy_mode);
      node.belief = config_.belief_filter == FilterKind::Truncated
                        ? truncate(*posterior, static_cast<std::size_t>(config_.truncation_size))
                        : std::move(*posterior);
    } else {
      node.inconsistent = true;
    }
  }
  const auto id = static_cast<std::int32_t>(tree_.size());
  tree_.push_back(std::move(node));
  tree_[parent].children[index_of(a) * SearchNode::kObservationCodes + obs.flags()] = id;
  return id;
}

void Planner::record(int depth, bool in_tree, double reward, double bonus, bool entropy_term) {
  if (trace_ != nullptr) trace_->push_back({stats_.iterations, depth, in_tree, reward, bonus, entropy_term});
}

double Planner::simulate(const State& s, std::int32_t node_id, int depth, TargetSet visited) {
  if (depth >= config_.max_depth) return 0.0;
  const Model& model = *model_;
  const Action a = ucb_select(tree_[node_id], config_.ucb_c);
  const State next = model.transition(s, a, *rng_);
  const Observation obs = model.observe(next);
  const double reward = model.reward(s, a, next);
  const bool terminal = model.is_terminal(next);
  visited.insert(model.map().target_index(next.drone));
  ++stats_.tree_steps;

  double bonus = 0.0;
  if (config_.exploration_strategy == ExplorationStrategy::ResponderReward && obs.responder_seen) {
    bonus += config_.rr_bonus;
  }

  std::int32_t child = tree_[node_id].child(a, obs.flags());
  const bool expanded = child == SearchNode::kNoChild;
  if (expanded) child = expand(node_id, a, obs);

  double value = 0.0;
  if (tree_[child].inconsistent) {
    // Only reachable with a truncated filter: the sampled state fell outside the support.
    ++stats_.aborted_simulations;
    record(depth, true, reward, bonus, false);
    value = reward + bonus;
  } else {
    const bool last_tree_step = expanded || terminal || depth + 1 >= config_.max_depth;
    bool entropy_term = false;
    switch (config_.exploration_strategy) {
      case ExplorationStrategy::CompleteEntropy:
      case ExplorationStrategy::TreeEntropy: entropy_term = true; break;
      case ExplorationStrategy::EndTreeEntropy: entropy_term = last_tree_step; break;
      case ExplorationStrategy::FirstStepEntropy: entropy_term = depth == 0; break;
      default: break;
    }
    if (entropy_term) {
      bonus -= config_.entropy_coeff * tree_[child].entropy;
      ++stats_.entropy_terms;
      ++iteration_entropy_terms_;
    }
    record(depth, true, reward, bonus, entropy_term);

    double future = 0.0;
    if (!terminal) {
      future = expanded ? rollout(next, child, depth + 1, visited) : simulate(next, child, depth + 1, visited);
    }
    value = reward + bonus + config_.gamma * future;
  }

  SearchNode& node = tree_[node_id];
  const int i = index_of(a);
  ++node.visits;
  ++node.action_visits[i];
  node.action_values[i] += (value - node.action_values[i]) / node.action_visits[i];
  return value;
}

double Planner::rollout(State s, std::int32_t leaf, int depth, TargetSet visited) {
  const Model& model = *model_;
  const GridMap& map = model.map();
  const bool track_belief = config_.exploration_strategy == ExplorationStrategy::CompleteEntropy;
  const RolloutPolicy policy = config_.rollout_policy;

  std::optional<Belief> belief;
  if (track_belief) belief = tree_[leaf].belief;
  if (policy == RolloutPolicy::MostProbable || policy == RolloutPolicy::StochasticProbable) {
    filter_.target_marginal(*tree_[leaf].belief, marginal_);
  }
  const std::uint64_t all_targets =
      map.target_count() == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << map.target_count()) - 1;

  CellId goal = kNoCell;
  double value = 0.0;
  double discount = 1.0;
  for (; depth < config_.max_depth; ++depth) {
    if (policy == RolloutPolicy::Random || (visited.bits() & all_targets) == all_targets) {
      goal = kNoCell;
    } else if (goal == kNoCell || s.drone == goal) {
      goal = select_rollout_target(policy, s, marginal_, visited, map, model.costs(), *rng_);
    }
    const Action a = select_rollout_action(config_.rollout_action_mode, s.drone, goal, map, model.costs(), *rng_);

    const State next = model.transition(s, a, *rng_);
    const Observation obs = model.observe(next);
    const double reward = model.reward(s, a, next);
    visited.insert(map.target_index(next.drone));
    ++stats_.rollout_steps;

    double bonus = 0.0;
    if (config_.exploration_strategy == ExplorationStrategy::ResponderReward && obs.responder_seen) {
      bonus += config_.rr_bonus;
    }
    bool entropy_term = false;
    if (track_belief) {
      UpdateResult result = filter_.update(filter_.predict(*belief, a), obs);
      auto* posterior = std::get_if<Belief>(&result);
      if (posterior == nullptr) {
        ++stats_.aborted_simulations;
        record(depth, false, reward, bonus, false);
        value += discount * (reward + bonus);
        break;
      }
      bonus -= config_.entropy_coeff * filter_.entropy(*posterior, config_.entropy_mode);
      entropy_term = true;
      ++stats_.entropy_terms;
      ++iteration_entropy_terms_;
      belief = config_.belief_filter == FilterKind::Truncated
                   ? truncate(*posterior, static_cast<std::size_t>(config_.truncation_size))
                   : std::move(*posterior);
    }
    record(depth, false, reward, bonus, entropy_term);

    value += discount * (reward + bonus);
    discount *= config_.gamma;
    if (model.is_terminal(next)) break;
    s = next;
  }
  return value;
}

}  // namespace sar
