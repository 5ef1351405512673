#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sarpomcp/errors.hpp"
#include "sarpomcp/map_io.hpp"
#include "sarpomcp/pomdp_model.hpp"

namespace sar {
namespace {

struct World {
  explicit World(GridMap m, ModelParams params = {}) : map(std::move(m)), costs(compute_costs(map)), model(map, costs, params) {}
  GridMap map;
  CostTable costs;
  Model model;
  State state(Position d, Position r, Position t) const { return {map.cell(d), map.cell(r), map.cell(t)}; }
};

TEST(Transition, StillResponderNeverMoves) {
  World w(make_environment(EnvironmentFamily::Small), ModelParams{.p_still = 1.0});
  Rng rng(1);
  const State s = w.state({2, 2}, {2, 1}, {4, 4});
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(w.model.transition(s, Action::Stay, rng).responder, s.responder);
}

TEST(Transition, BlockedDroneMoveStays) {
  World w(make_environment(EnvironmentFamily::Small));
  Rng rng(2);
  const State s = w.state({0, 0}, {2, 1}, {4, 4});
  EXPECT_EQ(w.model.transition(s, Action::West, rng).drone, s.drone);
  EXPECT_EQ(w.model.transition(s, Action::North, rng).drone, s.drone);
  EXPECT_EQ(w.model.transition(s, Action::South, rng).drone, w.map.cell({0, 1}));
}

TEST(Transition, ResponderStopsAtTarget) {
  World w(make_environment(EnvironmentFamily::Small), ModelParams{.p_still = 0.0});
  Rng rng(3);
  const State s = w.state({2, 2}, {4, 4}, {4, 4});
  for (int i = 0; i < 500; ++i) EXPECT_EQ(w.model.transition(s, Action::North, rng).responder, s.responder);
}

TEST(Transition, TargetNeverMovesAndResponderStaysPassable) {
  World w(make_environment(EnvironmentFamily::Building), ModelParams{.p_still = 0.1});
  Rng rng(4);
  State s{w.map.drone_start_cell(), w.map.responder_start_cells()[0], w.map.target_cells()[3]};
  for (int i = 0; i < 5000; ++i) {
    const State next = w.model.transition(s, kAllActions[i % kActionCount], rng);
    ASSERT_EQ(next.target, s.target);
    ASSERT_TRUE(w.map.passable(next.responder));
    ASSERT_TRUE(w.map.passable(next.drone));
    s = next;
    if (s.responder == s.target) s.responder = w.map.responder_start_cells()[0];
  }
}

TEST(Transition, AdjacentResponderReachesTargetAtAnalyticRate) {
  World w(make_environment(EnvironmentFamily::Small), ModelParams{.p_still = 0.0});
  const State s = w.state({2, 2}, {1, 0}, {0, 0});
  // Toward-goal branch plus the wander branch picking the target among three neighbors.
  const double analytic = 0.95 + 0.05 * (1.0 / 3.0);
  Rng rng(5);
  const int n = 200000;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += w.model.transition(s, Action::Stay, rng).responder == s.target ? 1 : 0;
  const double freq = static_cast<double>(hits) / n;
  EXPECT_NEAR(freq, analytic, 4.0 * std::sqrt(analytic * (1 - analytic) / n));
}

TEST(Transition, FrequenciesMatchEnumeratedOutcomes) {
  for (double p_still : {0.0, 0.3, 0.5}) {
    World w(make_environment(EnvironmentFamily::Building), ModelParams{.p_still = p_still});
    const Position r{7, 6};  // door cell below the crossing, two passable neighbors
    const Position t{14, 14};
    const State s = w.state({7, 7}, r, t);
    const auto expected = oracle::responder_step(w.map, r, t, p_still);

    double total = 0.0;
    for (const auto& o : w.model.responder_outcomes(s.responder, s.target)) {
      total += o.probability;
      EXPECT_NEAR(o.probability, expected.at(w.map.position(o.cell)), 1e-12);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);

    Rng rng(6);
    const int n = 100000;
    std::map<Position, int> counts;
    for (int i = 0; i < n; ++i) counts[w.map.position(w.model.transition(s, Action::Stay, rng).responder)]++;
    for (const auto& [cell, p] : expected) {
      const double freq = static_cast<double>(counts[cell]) / n;
      EXPECT_NEAR(freq, p, 4.0 * std::sqrt(p * (1 - p) / n) + 1e-9) << p_still;
    }
    for (const auto& [cell, c] : counts) EXPECT_TRUE(expected.count(cell));
  }
}

TEST(Transition, OutcomesSumToOneEverywhere) {
  World w(make_environment(EnvironmentFamily::Cross), ModelParams{.p_still = 0.37});
  for (CellId r = 0; r < w.map.cell_count(); ++r) {
    if (!w.map.passable(r)) continue;
    for (CellId t : w.map.target_cells()) {
      double total = 0.0;
      for (const auto& o : w.model.responder_outcomes(r, t)) {
        EXPECT_TRUE(w.map.passable(o.cell));
        total += o.probability;
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
  }
}

TEST(Transition, ExpectedCostToTargetDoesNotIncrease) {
  World w(make_environment(EnvironmentFamily::Large), ModelParams{.p_still = 0.5});
  Rng rng(8);
  const CellId t = w.map.target_cells()[0];
  for (CellId start : w.map.responder_start_cells()) {
    const State s{w.map.drone_start_cell(), start, t};
    const int n = 20000;
    double after = 0.0;
    for (int i = 0; i < n; ++i) after += w.costs.cost(w.model.transition(s, Action::Stay, rng).responder, t);
    EXPECT_LT(after / n, w.costs.cost(start, t));
  }
}

TEST(Observe, FlagsFollowColocation) {
  World w(make_environment(EnvironmentFamily::Small));
  const Observation a = w.model.observe(w.state({2, 2}, {2, 2}, {0, 0}));
  EXPECT_EQ(a.drone, w.map.cell({2, 2}));
  EXPECT_TRUE(a.responder_seen);
  EXPECT_FALSE(a.target_seen);
  const Observation b = w.model.observe(w.state({0, 0}, {0, 0}, {0, 0}));
  EXPECT_TRUE(b.responder_seen && b.target_seen);
  const Observation c = w.model.observe(w.state({1, 1}, {2, 2}, {0, 0}));
  EXPECT_FALSE(c.responder_seen || c.target_seen);
  EXPECT_EQ(observe(w.state({1, 1}, {2, 2}, {0, 0})), c);
}

TEST(Reward, OneOnEnteringTerminalState) {
  World w(make_environment(EnvironmentFamily::Small));
  const State before = w.state({1, 0}, {2, 1}, {0, 0});
  const State at = w.state({0, 0}, {2, 1}, {0, 0});
  EXPECT_EQ(w.model.reward(before, Action::West, at), 1.0);
  EXPECT_EQ(w.model.reward(at, Action::Stay, at), 0.0);
  EXPECT_EQ(w.model.reward(before, Action::Stay, w.state({3, 0}, {2, 1}, {0, 0})), 0.0);
  EXPECT_TRUE(w.model.is_terminal(at));
  EXPECT_FALSE(w.model.is_terminal(before));
}

TEST(Reward, ChebyshevRadius) {
  World w(make_environment(EnvironmentFamily::Small), ModelParams{.terminal_radius = 1});
  const State diagonal = w.state({1, 1}, {2, 1}, {0, 0});
  const State far = w.state({2, 2}, {2, 1}, {0, 0});
  EXPECT_TRUE(w.model.is_terminal(diagonal));
  EXPECT_FALSE(w.model.is_terminal(far));
  EXPECT_EQ(w.model.reward(far, Action::North, diagonal), 1.0);
  EXPECT_EQ(chebyshev_distance({1, 1}, {0, 0}), 1);
}

TEST(Reward, AgreesWithTerminalOnRandomTransitions) {
  World w(make_environment(EnvironmentFamily::Large), ModelParams{.terminal_radius = 1});
  Rng rng(9);
  std::uniform_int_distribution<int> pick_action(0, kActionCount - 1);
  State s{w.map.drone_start_cell(), w.map.responder_start_cells()[0], w.map.target_cells()[5]};
  for (int i = 0; i < 5000; ++i) {
    const State next = w.model.transition(s, kAllActions[pick_action(rng)], rng);
    EXPECT_EQ(w.model.reward(s, Action::Stay, next) == 1.0, !w.model.is_terminal(s) && w.model.is_terminal(next));
    s = w.model.is_terminal(next) ? State{w.map.drone_start_cell(), next.responder, next.target} : next;
  }
}

TEST(ModelParams, Validation) {
  EXPECT_THROW(ModelParams{.p_still = 1.5}.validate(), ConfigError);
  EXPECT_THROW(ModelParams{.max_steps = 0}.validate(), ConfigError);
  EXPECT_THROW(ModelParams{.terminal_radius = -1}.validate(), ConfigError);
  EXPECT_NO_THROW(ModelParams{}.validate());
}

}  // namespace
}  // namespace sar
