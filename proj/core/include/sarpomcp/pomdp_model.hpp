#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <random>

#include "sarpomcp/grid_world.hpp"

namespace sar {

using Rng = std::mt19937_64;

/// Hidden world configuration: drone, responder and target cells.
struct State {
  CellId drone = kNoCell;
  CellId responder = kNoCell;
  CellId target = kNoCell;

  friend constexpr auto operator<=>(const State&, const State&) = default;
};

/// The drone cell is always observed; the responder and the target only when
/// they share the drone's cell.
struct Observation {
  CellId drone = kNoCell;
  bool responder_seen = false;
  bool target_seen = false;

  /// 2-bit code of the two flags, used to key search-tree children.
  constexpr int flags() const { return (responder_seen ? 1 : 0) | (target_seen ? 2 : 0); }

  friend constexpr bool operator==(const Observation&, const Observation&) = default;
};

struct ModelParams {
  double p_still = 0.5;
  double toward_goal_factor = 0.95;
  double goal_reward = 1.0;
  int max_steps = 16;
  int terminal_radius = 0;

  /// Throws ConfigError when a field is out of range.
  void validate() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// One successor of the responder with its probability.
struct ResponderOutcome {
  CellId cell;
  double probability;
};

/// At most Stay + best step + four neighbors, merged by cell.
struct ResponderOutcomes {
  std::array<ResponderOutcome, 6> items{};
  int count = 0;

  const ResponderOutcome* begin() const { return items.data(); }
  const ResponderOutcome* end() const { return items.data() + count; }
};

/// The POMDP as a generative model. Holds references to a map and its cost
/// table, both of which must outlive the model. All members are const and
/// the model can be shared between threads that own their own Rng.
class Model {
 public:
  Model(const GridMap& map, const CostTable& costs, ModelParams params);

  const GridMap& map() const { return *map_; }
  const CostTable& costs() const { return *costs_; }
  const ModelParams& params() const { return params_; }

  /// Samples the successor state. The drone moves deterministically (blocked
  /// moves stay put), the target never moves, the responder follows the
  /// still / toward-goal / random-neighbor mixture and stops once at the target.
  State transition(const State& s, Action a, Rng& rng) const;

  /// Exact responder successor distribution, used by the Bayes filter.
  ResponderOutcomes responder_outcomes(CellId responder, CellId target) const;

  Observation observe(const State& s) const {
    return {s.drone, s.responder == s.drone, s.target == s.drone};
  }

  bool is_terminal(const State& s) const {
    return s.drone == s.target || chebyshev(s.drone, s.target) <= params_.terminal_radius;
  }

  /// goal_reward on the transition into a terminal state, zero otherwise.
  double reward(const State& prev, Action a, const State& next) const;

 private:
  int chebyshev(CellId a, CellId b) const;

  const GridMap* map_;
  const CostTable* costs_;
  ModelParams params_;
};

State transition(const Model& model, const State& s, Action a, Rng& rng);
Observation observe(const State& s);
double reward(const Model& model, const State& prev, Action a, const State& next);
bool is_terminal(const Model& model, const State& s);

}  // namespace sar
