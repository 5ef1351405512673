#include <algorithm>
#include <numeric>
#include <string>

#include "sarpomcp/belief.hpp"
#include "sarpomcp/errors.hpp"

namespace sar {
namespace {

// p_g(t_o) restricted to non-visited targets; uniform when that leaves no mass.
std::vector<double> remaining_target_weights(const SightingRecord& record, const GridMap& map, TargetSet visited,
                                             CellId drone) {
  const int targets = map.target_count();
  if (static_cast<int>(record.target_probabilities.size()) != targets) {
    throw std::invalid_argument("sighting record does not match the map's target count");
  }
  std::vector<double> weights(targets, 0.0);
  bool any_open = false;
  for (int g = 0; g < targets; ++g) {
    if (visited.contains(g) || map.target_cells()[g] == drone) continue;
    any_open = true;
    weights[g] = record.target_probabilities[g];
  }
  if (!any_open) throw EpisodeLogicError("regeneration requested with every target already visited");
  if (std::accumulate(weights.begin(), weights.end(), 0.0) <= 0.0) {
    for (int g = 0; g < targets; ++g) {
      if (!visited.contains(g) && map.target_cells()[g] != drone) weights[g] = 1.0;
    }
  }
  return weights;
}

}  // namespace

SightingRecord SightingRecord::from_prior(const Belief& prior, const GridMap& map) {
  SightingRecord record;
  record.target_probabilities.assign(map.target_count(), 0.0);
  for (const auto& e : prior.entries()) record.target_probabilities[map.target_index(e.state.target)] += e.probability;
  return record;
}

Belief regenerate_empty_target(const SightingRecord& record, const Model& model, TargetSet visited, CellId drone,
                               int now) {
  const GridMap& map = model.map();
  const std::vector<double> weights = remaining_target_weights(record, map, visited, drone);
  const int elapsed = std::max(0, now - record.time);

  std::vector<CellId> starts;
  if (record.responder_cell) {
    starts.push_back(*record.responder_cell);
  } else {
    starts.assign(map.responder_start_cells().begin(), map.responder_start_cells().end());
  }

  std::vector<WeightedState> generated;
  std::vector<double> current(map.cell_count(), 0.0);
  std::vector<double> next(map.cell_count(), 0.0);
  for (int g = 0; g < map.target_count(); ++g) {
    if (weights[g] <= 0.0) continue;
    const CellId goal = map.target_cells()[g];
    std::fill(current.begin(), current.end(), 0.0);
    for (CellId s : starts) current[s] += 1.0 / static_cast<double>(starts.size());
    for (int step = 0; step < elapsed; ++step) {
      std::fill(next.begin(), next.end(), 0.0);
      for (CellId c = 0; c < map.cell_count(); ++c) {
        if (current[c] == 0.0) continue;
        for (const auto& o : model.responder_outcomes(c, goal)) next[o.cell] += current[c] * o.probability;
      }
      current.swap(next);
    }
    for (CellId c = 0; c < map.cell_count(); ++c) {
      if (current[c] > 0.0) generated.push_back({{drone, c, goal}, weights[g] * current[c]});
    }
  }

  std::vector<WeightedState> unseen;
  std::copy_if(generated.begin(), generated.end(), std::back_inserter(unseen),
               [drone](const WeightedState& w) { return w.state.responder != drone; });
  return Belief::from_weights(unseen.empty() ? std::move(generated) : std::move(unseen));
}

Belief regenerate_unexpected_responder(const SightingRecord& record, CellId seen_at, const GridMap& map,
                                       const CostTable& costs, TargetSet visited) {
  const std::vector<double> p_goal = remaining_target_weights(record, map, visited, seen_at);

  std::vector<CellId> previous;
  if (record.responder_cell) {
    previous.push_back(*record.responder_cell);
  } else {
    previous.assign(map.responder_start_cells().begin(), map.responder_start_cells().end());
  }

  std::vector<WeightedState> generated;
  for (int g = 0; g < map.target_count(); ++g) {
    if (p_goal[g] <= 0.0) continue;
    const CellId goal = map.target_cells()[g];
    double efficiency = 0.0;
    for (CellId l_old : previous) {
      const int direct = costs.cost(l_old, goal);
      const int detour = costs.cost(l_old, seen_at) + costs.cost(seen_at, goal);
      if (detour == 0) {
        throw EpisodeLogicError("regeneration with zero detour cost at target " + std::to_string(g));
      }
      efficiency += static_cast<double>(direct) / static_cast<double>(detour);
    }
    efficiency /= static_cast<double>(previous.size());
    generated.push_back({{seen_at, seen_at, goal}, p_goal[g] * efficiency});
  }

  const bool any_mass = std::any_of(generated.begin(), generated.end(),
                                    [](const WeightedState& w) { return w.probability > 0.0; });
  if (!any_mass) {
    // Every remaining target had zero efficiency; fall back to p_g alone.
    for (auto& w : generated) w.probability = p_goal[map.target_index(w.state.target)];
  }
  return Belief::from_weights(std::move(generated));
}

}  // namespace sar
