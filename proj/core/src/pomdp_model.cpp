#include "sarpomcp/pomdp_model.hpp"

#include <algorithm>
#include <cstdlib>

#include "sarpomcp/errors.hpp"

namespace sar {

void ModelParams::validate() const {
  if (!(p_still >= 0.0 && p_still <= 1.0)) throw ConfigError("p_still must lie in [0, 1]");
  if (!(toward_goal_factor >= 0.0 && toward_goal_factor <= 1.0)) {
    throw ConfigError("toward_goal_factor must lie in [0, 1]");
  }
  if (max_steps < 1) throw ConfigError("max_steps must be positive");
  if (terminal_radius < 0) throw ConfigError("terminal_radius must be non-negative");
}

Model::Model(const GridMap& map, const CostTable& costs, ModelParams params)
    : map_(&map), costs_(&costs), params_(params) {
  params_.validate();
}

int Model::chebyshev(CellId a, CellId b) const {
  const int w = map_->width();
  return std::max(std::abs(a % w - b % w), std::abs(a / w - b / w));
}

State Model::transition(const State& s, Action a, Rng& rng) const {
  State next = s;
  next.drone = map_->apply(s.drone, a);
  if (s.responder == s.target) return next;

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  const double still = params_.p_still;
  const double toward = params_.toward_goal_factor * (1.0 - still);
  if (u < still) return next;
  if (u < still + toward) {
    const int t = map_->target_index(s.target);
    next.responder = map_->apply(s.responder, costs_->best_action(s.responder, t));
    return next;
  }
  const auto options = map_->neighbor_cells(s.responder);
  if (options.empty()) return next;
  std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
  next.responder = options[pick(rng)];
  return next;
}

ResponderOutcomes Model::responder_outcomes(CellId responder, CellId target) const {
  ResponderOutcomes out;
  auto add = [&out](CellId cell, double p) {
    if (p <= 0.0) return;
    for (int i = 0; i < out.count; ++i) {
      if (out.items[i].cell == cell) {
        out.items[i].probability += p;
        return;
      }
    }
    out.items[out.count++] = {cell, p};
  };

  if (responder == target) {
    add(responder, 1.0);
    return out;
  }
  const double still = params_.p_still;
  const double toward = params_.toward_goal_factor * (1.0 - still);
  const double wander = (1.0 - params_.toward_goal_factor) * (1.0 - still);
  add(responder, still);
  add(map_->apply(responder, costs_->best_action(responder, map_->target_index(target))), toward);
  const auto options = map_->neighbor_cells(responder);
  if (options.empty()) {
    add(responder, wander);
  } else {
    const double each = wander / static_cast<double>(options.size());
    for (CellId n : options) add(n, each);
  }
  return out;
}

double Model::reward(const State& prev, Action, const State& next) const {
  return (!is_terminal(prev) && is_terminal(next)) ? params_.goal_reward : 0.0;
}

State transition(const Model& model, const State& s, Action a, Rng& rng) { return model.transition(s, a, rng); }
Observation observe(const State& s) { return {s.drone, s.responder == s.drone, s.target == s.drone}; }
double reward(const Model& model, const State& prev, Action a, const State& next) {
  return model.reward(prev, a, next);
}
bool is_terminal(const Model& model, const State& s) { return model.is_terminal(s); }

}  // namespace sar
