#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "sarpomcp/grid_world.hpp"
#include "sarpomcp/pomdp_model.hpp"

namespace sar {

/// gH: entropy of the target marginal. bH: entropy of the full joint belief.
enum class EntropyMode : std::uint8_t { Goal, Full };

std::string_view to_string(EntropyMode m);
EntropyMode parse_entropy_mode(std::string_view name);

class Belief;
struct InconsistentObservation;
using UpdateResult = std::variant<Belief, InconsistentObservation>;

struct WeightedState {
  State state;
  double probability;
};

/// Discrete distribution over States sharing one drone cell.
///
/// Entries are kept sorted by (drone, responder, target) with strictly
/// positive probabilities summing to one.
class Belief {
 public:
  Belief() = default;

  /// Merges duplicate states, drops zero weights and normalizes. Throws
  /// std::invalid_argument on negative or non-finite weights, when no
  /// positive mass remains, or when the drone cells differ.
  static Belief from_weights(std::vector<WeightedState> weights);
  static Belief point_mass(const State& s);

  std::span<const WeightedState> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  CellId drone() const { return entries_.empty() ? kNoCell : entries_.front().state.drone; }

  double probability(const State& s) const;
  double total_mass() const;

  /// Draws a state given u uniform in [0, 1).
  const State& sample(double u) const;

 private:
  friend class BeliefFilter;
  friend Belief truncate(const Belief& b, std::size_t keep);
  friend UpdateResult update(const Belief& b, const Observation& obs);

  explicit Belief(std::vector<WeightedState> sorted) : entries_(std::move(sorted)) {}
  void normalize();

  std::vector<WeightedState> entries_;
};

enum class InconsistencyKind : std::uint8_t {
  /// All mass sat on targets that the drone now finds empty.
  EmptyTarget,
  /// The responder was seen in a cell the belief ruled out.
  UnexpectedResponder,
  /// The belief placed the responder under the drone but it is not there.
  MissingResponder,
  /// The target was seen where the belief ruled it out. The state is terminal.
  UnexpectedTarget,
};

std::string_view to_string(InconsistencyKind k);

/// The observation has zero probability under the belief. A signal for the
/// caller to regenerate, not a failure.
struct InconsistentObservation {
  InconsistencyKind kind;
  Observation observation;
};

/// Uniform over (drone_start, r, t) for every responder start r and target t.
Belief initial_belief(const GridMap& map);

/// Exact Bayes filter over the model's transition and observation functions.
/// Holds scratch buffers, so one instance per thread.
class BeliefFilter {
 public:
  explicit BeliefFilter(const Model& model);

  const Model& model() const { return *model_; }

  /// Pushes every support state through the enumerated transition distribution.
  Belief predict(const Belief& b, Action a);

  /// Zeroes states inconsistent with `obs` and renormalizes. Throws
  /// std::invalid_argument when the observed drone cell differs from the belief's.
  UpdateResult update(const Belief& b, const Observation& obs) const;

  /// Target marginal indexed by target candidate index.
  std::vector<double> target_marginal(const Belief& b) const;
  void target_marginal(const Belief& b, std::span<double> out) const;

  double entropy(const Belief& b, EntropyMode mode);

 private:
  const Model* model_;
  std::vector<double> accumulator_;
  std::vector<std::int32_t> touched_;
  std::vector<double> marginal_;
};

Belief predict(const Model& model, const Belief& b, Action a);
UpdateResult update(const Belief& b, const Observation& obs);

/// Keeps the `keep` most probable states and renormalizes. Ties go to the
/// lexicographically smaller state. Identity when size() <= keep.
Belief truncate(const Belief& b, std::size_t keep);

/// Shannon entropy in bits.
double entropy(const Belief& b, EntropyMode mode);

/// Memory kept alongside the episode belief for regeneration: where and when
/// the responder was last seen, and the target marginal at that moment.
struct SightingRecord {
  std::optional<CellId> responder_cell;
  int time = 0;
  std::vector<double> target_probabilities;

  /// No sighting yet; p_g is taken from the prior at t = 0.
  static SightingRecord from_prior(const Belief& prior, const GridMap& map);
};

/// Rebuilds the belief after an empty-target or missing-responder signal by
/// propagating the responder from its last sighting (or from every start
/// candidate) toward each non-visited target for `now - record.time` steps.
/// Each target keeps its recorded weight p_g(t_o). States with the responder
/// under the drone are dropped because the drone just failed to see it.
/// Throws EpisodeLogicError when every target has been visited.
Belief regenerate_empty_target(const SightingRecord& record, const Model& model, TargetSet visited, CellId drone,
                               int now);

/// Rebuilds the belief after the responder appears at `seen_at`.
/// Weight of target g: p_g * c(l_old, g) / (c(l_old, seen_at) + c(seen_at, g)).
/// Without a previous sighting, the ratio is averaged over the start candidates.
Belief regenerate_unexpected_responder(const SightingRecord& record, CellId seen_at, const GridMap& map,
                                       const CostTable& costs, TargetSet visited);

/// Debug dump, one `x_d,y_d,x_r,y_r,x_t,y_t,prob` line per state.
void write_belief_csv(std::ostream& out, const Belief& b, const GridMap& map);

}  // namespace sar
