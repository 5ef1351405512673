#include "sarpomcp/belief.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace sar {
namespace {

double plogp_sum(std::span<const double> masses) {
  double h = 0.0;
  for (double p : masses) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

bool consistent(const State& s, const Observation& o) {
  return (s.responder == o.drone) == o.responder_seen && (s.target == o.drone) == o.target_seen;
}

}  // namespace

std::string_view to_string(EntropyMode m) { return m == EntropyMode::Goal ? "gH" : "bH"; }

EntropyMode parse_entropy_mode(std::string_view name) {
  if (name == "gH") return EntropyMode::Goal;
  if (name == "bH") return EntropyMode::Full;
  throw std::invalid_argument("unknown entropy mode: " + std::string(name));
}

std::string_view to_string(InconsistencyKind k) {
  switch (k) {
    case InconsistencyKind::EmptyTarget: return "empty-target";
    case InconsistencyKind::UnexpectedResponder: return "unexpected-responder";
    case InconsistencyKind::MissingResponder: return "missing-responder";
    case InconsistencyKind::UnexpectedTarget: return "unexpected-target";
  }
  return "?";
}

Belief Belief::from_weights(std::vector<WeightedState> weights) {
  for (const auto& w : weights) {
    if (!std::isfinite(w.probability) || w.probability < 0.0) {
      throw std::invalid_argument("belief weights must be finite and non-negative");
    }
  }
  std::erase_if(weights, [](const WeightedState& w) { return w.probability == 0.0; });
  if (weights.empty()) throw std::invalid_argument("belief has no positive mass");
  std::sort(weights.begin(), weights.end(),
            [](const WeightedState& a, const WeightedState& b) { return a.state < b.state; });
  std::vector<WeightedState> merged;
  merged.reserve(weights.size());
  for (const auto& w : weights) {
    if (!merged.empty() && merged.back().state == w.state) {
      merged.back().probability += w.probability;
    } else {
      merged.push_back(w);
    }
  }
  const CellId drone = merged.front().state.drone;
  for (const auto& w : merged) {
    if (w.state.drone != drone) throw std::invalid_argument("belief states must share one drone cell");
  }
  Belief b(std::move(merged));
  b.normalize();
  return b;
}

Belief Belief::point_mass(const State& s) { return Belief({{s, 1.0}}); }

void Belief::normalize() {
  const double total = total_mass();
  for (auto& e : entries_) e.probability /= total;
}

double Belief::total_mass() const {
  double total = 0.0;
  for (const auto& e : entries_) total += e.probability;
  return total;
}

double Belief::probability(const State& s) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), s,
                             [](const WeightedState& e, const State& key) { return e.state < key; });
  return (it != entries_.end() && it->state == s) ? it->probability : 0.0;
}

const State& Belief::sample(double u) const {
  double acc = 0.0;
  for (const auto& e : entries_) {
    acc += e.probability;
    if (u < acc) return e.state;
  }
  return entries_.back().state;
}

Belief initial_belief(const GridMap& map) {
  std::vector<WeightedState> weights;
  for (CellId r : map.responder_start_cells()) {
    for (CellId t : map.target_cells()) weights.push_back({{map.drone_start_cell(), r, t}, 1.0});
  }
  return Belief::from_weights(std::move(weights));
}

BeliefFilter::BeliefFilter(const Model& model)
    : model_(&model),
      accumulator_(static_cast<std::size_t>(model.map().cell_count()) * model.map().target_count(), 0.0),
      marginal_(model.map().target_count(), 0.0) {}

Belief BeliefFilter::predict(const Belief& b, Action a) {
  const GridMap& map = model_->map();
  const int targets = map.target_count();
  touched_.clear();
  for (const auto& e : b.entries()) {
    const int t = map.target_index(e.state.target);
    for (const auto& outcome : model_->responder_outcomes(e.state.responder, e.state.target)) {
      const std::int32_t slot = outcome.cell * targets + t;
      if (accumulator_[slot] == 0.0) touched_.push_back(slot);
      accumulator_[slot] += e.probability * outcome.probability;
    }
  }
  const CellId drone = map.apply(b.drone(), a);
  const auto target_cells = map.target_cells();
  std::vector<WeightedState> out;
  out.reserve(touched_.size());
  auto emit = [&](std::int32_t slot) {
    out.push_back({{drone, slot / targets, target_cells[slot % targets]}, accumulator_[slot]});
    accumulator_[slot] = 0.0;
  };
  // Spread-out beliefs touch a large share of the slots; a linear scan then beats sorting.
  if (touched_.size() * 16 > accumulator_.size()) {
    for (std::int32_t slot = 0; slot < static_cast<std::int32_t>(accumulator_.size()); ++slot) {
      if (accumulator_[slot] != 0.0) emit(slot);
    }
  } else {
    std::sort(touched_.begin(), touched_.end());
    for (std::int32_t slot : touched_) emit(slot);
  }
  Belief next(std::move(out));
  next.normalize();
  return next;
}

UpdateResult BeliefFilter::update(const Belief& b, const Observation& obs) const { return sar::update(b, obs); }

void BeliefFilter::target_marginal(const Belief& b, std::span<double> out) const {
  const GridMap& map = model_->map();
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& e : b.entries()) out[map.target_index(e.state.target)] += e.probability;
}

std::vector<double> BeliefFilter::target_marginal(const Belief& b) const {
  std::vector<double> out(model_->map().target_count(), 0.0);
  target_marginal(b, out);
  return out;
}

double BeliefFilter::entropy(const Belief& b, EntropyMode mode) {
  if (mode == EntropyMode::Goal) {
    target_marginal(b, marginal_);
    return plogp_sum(marginal_);
  }
  double h = 0.0;
  for (const auto& e : b.entries()) h -= e.probability * std::log2(e.probability);
  return h;
}

Belief predict(const Model& model, const Belief& b, Action a) {
  BeliefFilter filter(model);
  return filter.predict(b, a);
}

UpdateResult update(const Belief& b, const Observation& obs) {
  if (!b.empty() && b.drone() != obs.drone) {
    throw std::invalid_argument("observation drone cell does not match the belief");
  }
  std::vector<WeightedState> kept;
  kept.reserve(b.size());
  for (const auto& e : b.entries()) {
    if (consistent(e.state, obs)) kept.push_back(e);
  }
  if (!kept.empty()) {
    Belief posterior(std::move(kept));
    posterior.normalize();
    return posterior;
  }

  const bool target_possible = std::any_of(b.entries().begin(), b.entries().end(), [&](const WeightedState& e) {
    return (e.state.target == obs.drone) == obs.target_seen;
  });
  InconsistencyKind kind = InconsistencyKind::MissingResponder;
  if (obs.target_seen && !target_possible) {
    kind = InconsistencyKind::UnexpectedTarget;
  } else if (obs.responder_seen) {
    kind = InconsistencyKind::UnexpectedResponder;
  } else if (!target_possible) {
    kind = InconsistencyKind::EmptyTarget;
  }
  return InconsistentObservation{kind, obs};
}

Belief truncate(const Belief& b, std::size_t keep) {
  if (keep == 0) throw std::invalid_argument("truncation size must be positive");
  if (b.size() <= keep) return b;
  std::vector<WeightedState> entries(b.entries().begin(), b.entries().end());
  auto more_probable = [](const WeightedState& x, const WeightedState& y) {
    if (x.probability != y.probability) return x.probability > y.probability;
    return x.state < y.state;
  };
  std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(keep), entries.end(),
                    more_probable);
  entries.resize(keep);
  std::sort(entries.begin(), entries.end(),
            [](const WeightedState& x, const WeightedState& y) { return x.state < y.state; });
  Belief out(std::move(entries));
  out.normalize();
  return out;
}

double entropy(const Belief& b, EntropyMode mode) {
  if (mode == EntropyMode::Full) {
    double h = 0.0;
    for (const auto& e : b.entries()) h -= e.probability * std::log2(e.probability);
    return h;
  }
  std::vector<std::pair<CellId, double>> marginal;
  for (const auto& e : b.entries()) {
    auto it = std::find_if(marginal.begin(), marginal.end(), [&](const auto& m) { return m.first == e.state.target; });
    if (it == marginal.end()) {
      marginal.emplace_back(e.state.target, e.probability);
    } else {
      it->second += e.probability;
    }
  }
  double h = 0.0;
  for (const auto& [cell, p] : marginal) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

void write_belief_csv(std::ostream& out, const Belief& b, const GridMap& map) {
  for (const auto& e : b.entries()) {
    const Position d = map.position(e.state.drone);
    const Position r = map.position(e.state.responder);
    const Position t = map.position(e.state.target);
    out << d.x << ',' << d.y << ',' << r.x << ',' << r.y << ',' << t.x << ',' << t.y << ',' << e.probability << '\n';
  }
}

}  // namespace sar
