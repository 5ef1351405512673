#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sarpomcp/belief.hpp"
#include "sarpomcp/grid_world.hpp"
#include "sarpomcp/pomdp_model.hpp"

namespace sar {

/// Where the intrinsic bonus enters the simulated return.
enum class ExplorationStrategy : std::uint8_t {
  Default,           // dfES: extrinsic reward only
  ResponderReward,   // rrES: +rr_bonus whenever the responder is observed
  CompleteEntropy,   // chES: -coeff*H at every tree and rollout step
  TreeEntropy,       // thES: -coeff*H at every tree step
  EndTreeEntropy,    // ehES: -coeff*H at the last tree step only
  FirstStepEntropy,  // fhES: -coeff*H at the first tree step only
};

/// How the rollout picks the cell it heads for.
enum class RolloutPolicy : std::uint8_t {
  Random,              // rRS
  SampleTarget,        // stRS
  NearestTarget,       // dnRS
  StochasticNearest,   // snRS
  MostProbable,        // dpRS
  StochasticProbable,  // spRS
};

enum class RolloutActionMode : std::uint8_t { Best, Stochastic };  // bRA, sRA
enum class FilterKind : std::uint8_t { Complete, Truncated };      // cF, aF

std::string_view to_string(ExplorationStrategy s);
std::string_view to_string(RolloutPolicy p);
std::string_view to_string(RolloutActionMode m);
std::string_view to_string(FilterKind f);
ExplorationStrategy parse_exploration_strategy(std::string_view name);
RolloutPolicy parse_rollout_policy(std::string_view name);
RolloutActionMode parse_rollout_action_mode(std::string_view name);
FilterKind parse_filter_kind(std::string_view name);

bool uses_entropy(ExplorationStrategy s);

struct PlannerConfig {
  int num_samples = 1000;
  int max_depth = 14;
  double ucb_c = 1.0;
  double gamma = 0.95;
  ExplorationStrategy exploration_strategy = ExplorationStrategy::Default;
  EntropyMode entropy_mode = EntropyMode::Goal;
  double entropy_coeff = 0.2;
  double rr_bonus = 0.1;
  RolloutPolicy rollout_policy = RolloutPolicy::Random;
  RolloutActionMode rollout_action_mode = RolloutActionMode::Best;
  FilterKind belief_filter = FilterKind::Complete;
  int truncation_size = 20;

  /// Throws ConfigError when a field is out of range.
  void validate() const;

  friend bool operator==(const PlannerConfig&, const PlannerConfig&) = default;
};

/// History node. Children are keyed by action and the two observation flags;
/// the observed drone cell follows from the action.
struct SearchNode {
  static constexpr int kObservationCodes = 4;
  static constexpr std::int32_t kNoChild = -1;

  CellId drone = kNoCell;
  std::uint8_t legal_actions = 0;
  int visits = 0;
  std::array<int, kActionCount> action_visits{};
  std::array<double, kActionCount> action_values{};
  std::array<std::int32_t, kActionCount * kObservationCodes> children{};
  std::optional<Belief> belief;
  /// Entropy of the belief before truncation, in the configured mode.
  double entropy = 0.0;
  /// The observation leading here has zero probability under the parent belief.
  bool inconsistent = false;

  bool is_legal(Action a) const { return (legal_actions >> index_of(a)) & 1U; }
  std::int32_t child(Action a, int observation_flags) const {
    return children[index_of(a) * kObservationCodes + observation_flags];
  }
};

/// UCB1 over legal actions. Untried actions come first, in N, E, S, W, Stay order.
Action ucb_select(const SearchNode& node, double c);

/// Chooses the cell the rollout heads for. Returns kNoCell for the random policy.
/// Throws EpisodeLogicError when every target has been visited.
CellId select_rollout_target(RolloutPolicy policy, const State& sample, std::span<const double> target_marginal,
                             TargetSet visited, const GridMap& map, const CostTable& costs, Rng& rng);

/// Probability of each action under sRA: proportional to 1/(cost(next, target)+1)
/// over legal actions, zero for illegal ones.
std::array<double, kActionCount> stochastic_action_weights(CellId drone, CellId target, const GridMap& map,
                                                           const CostTable& costs);

/// With target == kNoCell, draws uniformly among legal actions (the random
/// rollout). Throws EpisodeLogicError when the target is unreachable.
Action select_rollout_action(RolloutActionMode mode, CellId drone, CellId target, const GridMap& map,
                             const CostTable& costs, Rng& rng);

struct PlannerStats {
  int iterations = 0;
  long tree_steps = 0;
  long rollout_steps = 0;
  long entropy_terms = 0;
  int min_entropy_terms_per_iteration = 0;
  int max_entropy_terms_per_iteration = 0;
  int aborted_simulations = 0;
  std::size_t nodes = 0;
};

/// One simulated step, recorded when a trace sink is attached.
struct TraceStep {
  int iteration;
  int depth;
  bool in_tree;
  double reward;
  double bonus;
  bool entropy_term;
};

/// POMCP over action-observation histories with an exact (or truncated)
/// belief cached per node. The tree is rebuilt on every plan() call.
class Planner {
 public:
  Planner(const Model& model, PlannerConfig config);

  /// Runs config.num_samples simulations from `root` and returns the action
  /// with the highest value, ties in N, E, S, W, Stay order. `visited` lists
  /// target candidates already known to be empty. Throws EpisodeLogicError
  /// when the belief is empty or every support state is terminal.
  Action plan(const Belief& root, TargetSet visited, Rng& rng);

  const PlannerConfig& config() const { return config_; }
  const PlannerStats& stats() const { return stats_; }
  const std::vector<SearchNode>& tree() const { return tree_; }
  const SearchNode& root() const { return tree_.front(); }

  void set_trace(std::vector<TraceStep>* trace) { trace_ = trace; }

 private:
  bool tracks_tree_beliefs() const;
  std::int32_t expand(std::int32_t parent, Action a, const Observation& obs);
  double simulate(const State& s, std::int32_t node, int depth, TargetSet visited);
  double rollout(State s, std::int32_t leaf, int depth, TargetSet visited);
  void record(int depth, bool in_tree, double reward, double bonus, bool entropy_term);

  const Model* model_;
  PlannerConfig config_;
  BeliefFilter filter_;
  std::vector<SearchNode> tree_;
  PlannerStats stats_;
  std::vector<double> marginal_;
  std::vector<TraceStep>* trace_ = nullptr;
  Rng* rng_ = nullptr;
  int iteration_entropy_terms_ = 0;
};

}  // namespace sar
