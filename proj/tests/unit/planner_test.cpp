#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sarpomcp/errors.hpp"
#include "sarpomcp/map_io.hpp"
#include "sarpomcp/planner.hpp"

namespace sar {
namespace {

struct World {
  explicit World(GridMap m, ModelParams params = {})
      : map(std::move(m)), costs(compute_costs(map)), model(map, costs, params) {}
  GridMap map;
  CostTable costs;
  Model model;
};

SearchNode node_with(std::uint8_t legal, int visits, std::array<int, 5> n, std::array<double, 5> q) {
  SearchNode node;
  node.legal_actions = legal;
  node.visits = visits;
  node.action_visits = n;
  node.action_values = q;
  return node;
}

PlannerConfig config_for(ExplorationStrategy s, int samples, int depth = 14) {
  PlannerConfig c;
  c.exploration_strategy = s;
  c.num_samples = samples;
  c.max_depth = depth;
  return c;
}

TEST(Ucb, UntriedActionComesFirst) {
  const auto node = node_with(0b11111, 9, {3, 0, 2, 4, 0}, {0.9, 0.0, 0.8, 0.95, 0.1});
  EXPECT_EQ(ucb_select(node, 1.0), Action::East);
}

TEST(Ucb, EqualCountsReduceToArgmaxQ) {
  const auto node = node_with(0b11111, 10, {2, 2, 2, 2, 2}, {0.1, 0.4, 0.3, 0.2, 0.35});
  EXPECT_EQ(ucb_select(node, 5.0), Action::East);
}

TEST(Ucb, TiesFollowFixedOrder) {
  const auto node = node_with(0b11111, 10, {2, 2, 2, 2, 2}, {0.3, 0.3, 0.3, 0.3, 0.3});
  EXPECT_EQ(ucb_select(node, 1.0), Action::North);
  const auto partial = node_with(0b11010, 6, {0, 2, 0, 2, 2}, {0.0, 0.3, 0.0, 0.3, 0.3});
  EXPECT_EQ(ucb_select(partial, 1.0), Action::East);
}

TEST(Ucb, MatchesDirectFormulaEvaluation) {
  // Stay is illegal, so its zero count must not count as untried.
  const std::array<int, 5> n{2, 3, 1, 4, 0};
  const std::array<double, 5> q{0.5, 0.6, 0.1, 0.7, 9.0};
  const auto node = node_with(0b01111, 10, n, q);
  for (double c : {0.0, 0.5, 1.0, 2.0}) {
    int best = -1;
    double best_score = -1e300;
    for (int a = 0; a < 4; ++a) {
      const double score = q[a] + c * std::sqrt(std::log(10.0) / n[a]);
      if (score > best_score) {
        best_score = score;
        best = a;
      }
    }
    EXPECT_EQ(index_of(ucb_select(node, c)), best) << c;
  }
  // 0.1 + sqrt(ln 10) = 1.617 beats 0.5 + sqrt(ln 10 / 2) = 1.573.
  EXPECT_EQ(ucb_select(node, 1.0), Action::South);
}

TEST(RolloutTarget, SingleOpenTargetIsForced) {
  World w(make_environment(EnvironmentFamily::Small));
  Rng rng(1);
  TargetSet visited(0b1011);
  const std::vector<double> marginal{0.7, 0.1, 0.0, 0.2};
  const State s{w.map.drone_start_cell(), w.map.responder_start_cells()[0], w.map.target_cells()[2]};
  for (auto p : {RolloutPolicy::SampleTarget, RolloutPolicy::NearestTarget, RolloutPolicy::StochasticNearest,
                 RolloutPolicy::MostProbable, RolloutPolicy::StochasticProbable}) {
    EXPECT_EQ(select_rollout_target(p, s, marginal, visited, w.map, w.costs, rng), w.map.target_cells()[2]);
  }
  EXPECT_EQ(select_rollout_target(RolloutPolicy::Random, s, marginal, visited, w.map, w.costs, rng), kNoCell);
  EXPECT_THROW(select_rollout_target(RolloutPolicy::NearestTarget, s, marginal, TargetSet(0b1111), w.map, w.costs, rng),
               EpisodeLogicError);
}

TEST(RolloutTarget, NearestAndStochasticNearest) {
  // Drone at (0,0); targets at distance 1 and 3 along the corridor, plus 4 and 9 further out.
  const GridMap map = parse_map("DT.TR\n.....\n.....\n.....\n.T...\n");
  World w(map);
  Rng rng(2);
  const State s{w.map.drone_start_cell(), w.map.responder_start_cells()[0], w.map.target_cells()[0]};
  const std::vector<double> marginal(w.map.target_count(), 1.0 / w.map.target_count());
  // Targets: (1,0) at 1, (3,0) at 3, (1,4) at 5. Visit (1,4) away to leave distances {1, 3}.
  TargetSet visited;
  visited.insert(2);
  EXPECT_EQ(select_rollout_target(RolloutPolicy::NearestTarget, s, marginal, visited, w.map, w.costs, rng),
            w.map.cell({1, 0}));
  const int n = 100000;
  int near = 0;
  for (int i = 0; i < n; ++i) {
    near += select_rollout_target(RolloutPolicy::StochasticNearest, s, marginal, visited, w.map, w.costs, rng) ==
            w.map.cell({1, 0});
  }
  const double p = (1.0 / 2.0) / (1.0 / 2.0 + 1.0 / 4.0);
  EXPECT_NEAR(static_cast<double>(near) / n, p, 3.0 * std::sqrt(p * (1 - p) / n));
}

TEST(RolloutTarget, NearestWithDistancesFourAndNine) {
  const GridMap map = parse_map("T...D........T\nR.............\n");
  World w(map);
  Rng rng(3);
  const State s{w.map.drone_start_cell(), w.map.responder_start_cells()[0], w.map.target_cells()[1]};
  const std::vector<double> marginal{0.5, 0.5};
  EXPECT_EQ(w.costs.cost(s.drone, w.map.target_cells()[0]), 4);
  EXPECT_EQ(w.costs.cost(s.drone, w.map.target_cells()[1]), 9);
  EXPECT_EQ(select_rollout_target(RolloutPolicy::NearestTarget, s, marginal, {}, w.map, w.costs, rng),
            w.map.target_cells()[0]);
}

TEST(RolloutTarget, ProbabilityDrivenPolicies) {
  World w(make_environment(EnvironmentFamily::Small));
  Rng rng(4);
  const State s{w.map.drone_start_cell(), w.map.responder_start_cells()[0], w.map.target_cells()[0]};
  const std::vector<double> marginal{0.6, 0.1, 0.2, 0.1};
  TargetSet visited;
  visited.insert(0);
  EXPECT_EQ(select_rollout_target(RolloutPolicy::MostProbable, s, marginal, visited, w.map, w.costs, rng),
            w.map.target_cells()[2]);
  EXPECT_EQ(select_rollout_target(RolloutPolicy::SampleTarget, s, marginal, visited, w.map, w.costs, rng),
            s.target);

  std::map<CellId, int> counts;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    counts[select_rollout_target(RolloutPolicy::StochasticProbable, s, marginal, visited, w.map, w.costs, rng)]++;
  }
  EXPECT_EQ(counts.count(w.map.target_cells()[0]), 0u);
  for (int g : {1, 2, 3}) {
    const double p = marginal[g] / 0.4;
    EXPECT_NEAR(static_cast<double>(counts[w.map.target_cells()[g]]) / n, p, 4.0 * std::sqrt(p * (1 - p) / n));
  }

  // No open mass left: uniform over the open candidates.
  const std::vector<double> exhausted{1.0, 0.0, 0.0, 0.0};
  counts.clear();
  for (int i = 0; i < n; ++i) {
    counts[select_rollout_target(RolloutPolicy::StochasticProbable, s, exhausted, visited, w.map, w.costs, rng)]++;
  }
  for (int g : {1, 2, 3}) {
    EXPECT_NEAR(static_cast<double>(counts[w.map.target_cells()[g]]) / n, 1.0 / 3.0, 0.01);
  }
}

TEST(RolloutAction, BestActionHeadsWest) {
  World w(make_environment(EnvironmentFamily::Small));
  Rng rng(5);
  EXPECT_EQ(select_rollout_action(RolloutActionMode::Best, w.map.cell({2, 2}), w.map.cell({0, 2}), w.map, w.costs, rng),
            Action::West);
}

TEST(RolloutAction, BestActionReachesTargetInCostSteps) {
  World w(make_environment(EnvironmentFamily::Small));
  Rng rng(6);
  CellId at = w.map.cell({2, 2});
  const CellId target = w.map.cell({4, 3});
  int steps = 0;
  while (at != target) {
    at = w.map.apply(at, select_rollout_action(RolloutActionMode::Best, at, target, w.map, w.costs, rng));
    ++steps;
  }
  EXPECT_EQ(steps, 3);
}

TEST(RolloutAction, StochasticWeightsMatchInverseDistance) {
  World w(make_environment(EnvironmentFamily::Building));
  const CellId drone = w.map.cell({7, 6});
  const CellId target = w.map.target_cells()[0];
  const auto weights = stochastic_action_weights(drone, target, w.map, w.costs);
  double total = 0.0;
  std::array<double, kActionCount> expected{};
  for (Action a : kAllActions) {
    const Position next = oracle::move(w.map, w.map.position(drone), a);
    const bool legal = a == Action::Stay || next != w.map.position(drone);
    if (!legal) continue;
    expected[index_of(a)] = 1.0 / (oracle::distance(w.map, next, w.map.position(target)) + 1.0);
    total += expected[index_of(a)];
  }
  for (int i = 0; i < kActionCount; ++i) EXPECT_NEAR(weights[i], expected[i] / total, 1e-12);
  EXPECT_EQ(weights[index_of(Action::East)], 0.0);  // wall

  Rng rng(7);
  std::array<int, kActionCount> counts{};
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    counts[index_of(select_rollout_action(RolloutActionMode::Stochastic, drone, target, w.map, w.costs, rng))]++;
  }
  for (int i = 0; i < kActionCount; ++i) {
    const double p = weights[i];
    EXPECT_NEAR(static_cast<double>(counts[i]) / n, p, 4.0 * std::sqrt(p * (1 - p) / n) + 1e-9);
  }
}

TEST(RolloutAction, StochasticFavoursStepOntoTarget) {
  World w(make_environment(EnvironmentFamily::Small));
  const auto weights = stochastic_action_weights(w.map.cell({1, 0}), w.map.cell({0, 0}), w.map, w.costs);
  const auto best = std::max_element(weights.begin(), weights.end()) - weights.begin();
  EXPECT_EQ(best, index_of(Action::West));
}

TEST(RolloutAction, RandomIsUniformOverLegalActions) {
  World w(make_environment(EnvironmentFamily::Small));
  Rng rng(8);
  const CellId corner = w.map.cell({0, 0});
  std::array<int, kActionCount> counts{};
  const int n = 90000;
  for (int i = 0; i < n; ++i) {
    counts[index_of(select_rollout_action(RolloutActionMode::Best, corner, kNoCell, w.map, w.costs, rng))]++;
  }
  EXPECT_EQ(counts[index_of(Action::North)], 0);
  EXPECT_EQ(counts[index_of(Action::West)], 0);
  for (Action a : {Action::East, Action::South, Action::Stay}) {
    EXPECT_NEAR(static_cast<double>(counts[index_of(a)]) / n, 1.0 / 3.0, 0.01);
  }
}

TEST(RolloutAction, UnreachableTargetThrows) {
  World w(parse_map("D.#.\nRT#.\n"));
  Rng rng(9);
  EXPECT_THROW(select_rollout_action(RolloutActionMode::Best, w.map.drone_start_cell(), w.map.cell({3, 0}), w.map,
                                     w.costs, rng),
               EpisodeLogicError);
}

TEST(Plan, PointMassTargetOneStepEast) {
  World w(make_environment(EnvironmentFamily::Small), ModelParams{.p_still = 1.0});
  const Belief root = Belief::point_mass({w.map.cell({3, 4}), w.map.cell({2, 1}), w.map.cell({4, 4})});
  Planner planner(w.model, config_for(ExplorationStrategy::Default, 2000));
  Rng rng(10);
  EXPECT_EQ(planner.plan(root, TargetSet{}, rng), Action::East);
}

TEST(Plan, RolloutValuesAreDiscountedDistances) {
  // One iteration per root action, each followed by a deterministic rollout
  // to the known target: Q(a) = gamma^cost(next, target).
  World w(make_environment(EnvironmentFamily::Small), ModelParams{.p_still = 1.0});
  const CellId target = w.map.cell({4, 4});
  const Belief root = Belief::point_mass({w.map.cell({2, 2}), w.map.cell({2, 1}), target});
  PlannerConfig cfg = config_for(ExplorationStrategy::Default, 5);
  cfg.rollout_policy = RolloutPolicy::SampleTarget;
  cfg.gamma = 0.9;
  Planner planner(w.model, cfg);
  Rng rng(11);
  planner.plan(root, TargetSet{}, rng);
  for (Action a : kAllActions) {
    const int cost = w.costs.cost(w.map.apply(w.map.cell({2, 2}), a), target);
    EXPECT_NEAR(planner.root().action_values[index_of(a)], std::pow(0.9, cost), 1e-12) << to_string(a);
  }
}

TEST(Plan, RejectsEmptyOrTerminalBeliefs) {
  World w(make_environment(EnvironmentFamily::Small));
  Planner planner(w.model, config_for(ExplorationStrategy::Default, 10));
  Rng rng(12);
  EXPECT_THROW(planner.plan(Belief{}, TargetSet{}, rng), EpisodeLogicError);
  const CellId t = w.map.cell({0, 0});
  EXPECT_THROW(planner.plan(Belief::point_mass({t, w.map.cell({2, 1}), t}), TargetSet{}, rng), EpisodeLogicError);
}

TEST(Plan, VisitCountsAndValueBounds) {
  World w(make_environment(EnvironmentFamily::Small));
  const Belief prior = initial_belief(w.map);
  for (auto s : {ExplorationStrategy::Default, ExplorationStrategy::CompleteEntropy, ExplorationStrategy::TreeEntropy,
                 ExplorationStrategy::ResponderReward}) {
    Planner planner(w.model, config_for(s, 300));
    Rng rng(13);
    planner.plan(prior, TargetSet{}, rng);
    const SearchNode& root = planner.root();
    int total = 0;
    for (int n : root.action_visits) total += n;
    EXPECT_EQ(total, 300);
    for (const SearchNode& node : planner.tree()) {
      int sum = 0;
      for (int n : node.action_visits) sum += n;
      ASSERT_EQ(node.visits, sum);
    }
    const double h_max = std::log2(8.0);
    for (int a = 0; a < kActionCount; ++a) {
      if (root.action_visits[a] == 0) continue;
      if (s == ExplorationStrategy::Default) {
        EXPECT_GE(root.action_values[a], 0.0);
        EXPECT_LE(root.action_values[a], 1.0);
      }
      EXPECT_GE(root.action_values[a], -0.2 * h_max * 14);
    }
  }
}

TEST(Plan, DeterministicUnderFixedSeed) {
  World w(make_environment(EnvironmentFamily::Large));
  const Belief prior = initial_belief(w.map);
  for (auto s : {ExplorationStrategy::Default, ExplorationStrategy::EndTreeEntropy}) {
    PlannerConfig cfg = config_for(s, 200, 25);
    cfg.rollout_policy = RolloutPolicy::StochasticProbable;
    cfg.rollout_action_mode = RolloutActionMode::Stochastic;
    Planner a(w.model, cfg);
    Planner b(w.model, cfg);
    Rng r1(99), r2(99);
    EXPECT_EQ(a.plan(prior, TargetSet{}, r1), b.plan(prior, TargetSet{}, r2));
    EXPECT_EQ(a.root().action_values, b.root().action_values);
    EXPECT_EQ(a.root().action_visits, b.root().action_visits);
    EXPECT_EQ(r1(), r2());
  }
}

TEST(BonusLocality, EndAndFirstStepAddExactlyOneTermPerIteration) {
  World w(make_environment(EnvironmentFamily::Small));
  const Belief prior = initial_belief(w.map);
  for (auto s : {ExplorationStrategy::EndTreeEntropy, ExplorationStrategy::FirstStepEntropy}) {
    for (auto mode : {EntropyMode::Goal, EntropyMode::Full}) {
      PlannerConfig cfg = config_for(s, 500);
      cfg.entropy_mode = mode;
      Planner planner(w.model, cfg);
      Rng rng(14);
      planner.plan(prior, TargetSet{}, rng);
      EXPECT_EQ(planner.stats().entropy_terms, 500);
      EXPECT_EQ(planner.stats().min_entropy_terms_per_iteration, 1);
      EXPECT_EQ(planner.stats().max_entropy_terms_per_iteration, 1);
    }
  }
}

TEST(BonusLocality, TreeEntropyCountsTreeSteps) {
  World w(make_environment(EnvironmentFamily::Small));
  const Belief prior = initial_belief(w.map);
  std::vector<TraceStep> trace;
  Planner planner(w.model, config_for(ExplorationStrategy::TreeEntropy, 300));
  planner.set_trace(&trace);
  Rng rng(15);
  planner.plan(prior, TargetSet{}, rng);
  long tree_steps = 0;
  for (const TraceStep& t : trace) {
    if (t.in_tree) {
      ++tree_steps;
      EXPECT_TRUE(t.entropy_term);
    } else {
      EXPECT_FALSE(t.entropy_term);
      EXPECT_EQ(t.bonus, 0.0);
    }
  }
  EXPECT_EQ(planner.stats().entropy_terms, tree_steps);
  EXPECT_EQ(planner.stats().tree_steps, tree_steps);
}

TEST(BonusLocality, CompleteEntropyCoversRollouts) {
  World w(make_environment(EnvironmentFamily::Small));
  const Belief prior = initial_belief(w.map);
  std::vector<TraceStep> trace;
  Planner planner(w.model, config_for(ExplorationStrategy::CompleteEntropy, 100));
  planner.set_trace(&trace);
  Rng rng(16);
  planner.plan(prior, TargetSet{}, rng);
  ASSERT_EQ(planner.stats().aborted_simulations, 0);
  for (const TraceStep& t : trace) EXPECT_TRUE(t.entropy_term);
  EXPECT_EQ(planner.stats().entropy_terms, planner.stats().tree_steps + planner.stats().rollout_steps);
}

TEST(BonusLocality, ResponderRewardOnlyGrantsFixedBonus) {
  World w(make_environment(EnvironmentFamily::Small));
  std::vector<TraceStep> trace;
  Planner planner(w.model, config_for(ExplorationStrategy::ResponderReward, 300));
  planner.set_trace(&trace);
  Rng rng(17);
  planner.plan(initial_belief(w.map), TargetSet{}, rng);
  int granted = 0;
  for (const TraceStep& t : trace) {
    EXPECT_TRUE(t.bonus == 0.0 || t.bonus == 0.1);
    granted += t.bonus > 0.0;
  }
  EXPECT_GT(granted, 0);
}

TEST(BonusLocality, DefaultAndEndTreeDifferByOneTermPerIteration) {
  // With one iteration per root action, the paths do not depend on Q values,
  // so a shared seed replays identical simulations.
  World w(make_environment(EnvironmentFamily::Small));
  const Belief prior = initial_belief(w.map);
  std::vector<TraceStep> plain, shaped;
  Planner dfes(w.model, config_for(ExplorationStrategy::Default, 5));
  Planner ehes(w.model, config_for(ExplorationStrategy::EndTreeEntropy, 5));
  dfes.set_trace(&plain);
  ehes.set_trace(&shaped);
  Rng r1(18), r2(18);
  dfes.plan(prior, TargetSet{}, r1);
  ehes.plan(prior, TargetSet{}, r2);
  ASSERT_EQ(plain.size(), shaped.size());

  std::array<int, 5> terms{};
  for (std::size_t i = 0; i < plain.size(); ++i) {
    EXPECT_EQ(plain[i].iteration, shaped[i].iteration);
    EXPECT_EQ(plain[i].depth, shaped[i].depth);
    EXPECT_EQ(plain[i].in_tree, shaped[i].in_tree);
    EXPECT_EQ(plain[i].reward, shaped[i].reward);
    EXPECT_EQ(plain[i].bonus, 0.0);
    if (!shaped[i].entropy_term) {
      EXPECT_EQ(shaped[i].bonus, 0.0);
      continue;
    }
    ++terms[shaped[i].iteration];
    ASSERT_EQ(shaped[i].depth, 0);
    // Oracle: entropy of the target marginal after the root action and its observation.
    const Action a = kAllActions[shaped[i].iteration];
    const oracle::Joint predicted =
        oracle::push_forward(w.map, oracle::to_joint(prior, w.map), a, w.model.params().p_still);
    int flags = -1;
    for (int f = 0; f < SearchNode::kObservationCodes; ++f) {
      if (ehes.root().child(a, f) != SearchNode::kNoChild) flags = f;
    }
    ASSERT_GE(flags, 0);
    const bool rseen = (flags & 1) != 0;
    const auto conditioned = oracle::condition(predicted, rseen, false).first;
    std::map<Position, double> marginal;
    for (const auto& [s, p] : conditioned) marginal[std::get<2>(s)] += p;
    double h = 0.0;
    for (const auto& [t, p] : marginal) h -= p * std::log2(p);
    EXPECT_NEAR(shaped[i].bonus, -0.2 * h, 1e-12);
  }
  for (int n : terms) EXPECT_EQ(n, 1);
}

TEST(Equivalence, CompleteEntropyMatchesDefaultOnPointMass) {
  World w(make_environment(EnvironmentFamily::Small), ModelParams{.p_still = 1.0});
  const Belief root = Belief::point_mass({w.map.cell({2, 2}), w.map.cell({2, 1}), w.map.cell({4, 0})});
  Planner dfes(w.model, config_for(ExplorationStrategy::Default, 400));
  Planner ches(w.model, config_for(ExplorationStrategy::CompleteEntropy, 400));
  Rng r1(19), r2(19);
  EXPECT_EQ(dfes.plan(root, TargetSet{}, r1), ches.plan(root, TargetSet{}, r2));
  EXPECT_EQ(dfes.root().action_values, ches.root().action_values);
  EXPECT_EQ(dfes.root().action_visits, ches.root().action_visits);
}

TEST(PlannerConfig, ValidationAndNames) {
  EXPECT_THROW(config_for(ExplorationStrategy::Default, 0).validate(), ConfigError);
  EXPECT_THROW(config_for(ExplorationStrategy::Default, 10, 0).validate(), ConfigError);
  PlannerConfig c;
  c.gamma = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.gamma = 1.0;
  c.entropy_coeff = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(Planner(World(make_environment(EnvironmentFamily::Small)).model, c), ConfigError);

  for (auto s : {"dfES", "rrES", "chES", "thES", "ehES", "fhES"}) EXPECT_EQ(to_string(parse_exploration_strategy(s)), s);
  for (auto p : {"rRS", "stRS", "dnRS", "snRS", "dpRS", "spRS"}) EXPECT_EQ(to_string(parse_rollout_policy(p)), p);
  EXPECT_EQ(parse_rollout_action_mode("sRA"), RolloutActionMode::Stochastic);
  EXPECT_EQ(parse_filter_kind("aF"), FilterKind::Truncated);
  EXPECT_THROW(parse_rollout_policy("xRS"), std::invalid_argument);
}

}  // namespace
}  // namespace sar
