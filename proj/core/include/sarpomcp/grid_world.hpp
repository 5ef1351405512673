#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sar {

struct Position {
  int x = 0;
  int y = 0;

  friend constexpr auto operator<=>(const Position&, const Position&) = default;
};

/// Row-major index of a cell, y * width + x.
using CellId = std::int32_t;
inline constexpr CellId kNoCell = -1;

enum class Action : std::uint8_t { North = 0, East = 1, South = 2, West = 3, Stay = 4 };

inline constexpr int kActionCount = 5;
inline constexpr std::array<Action, kActionCount> kAllActions = {
    Action::North, Action::East, Action::South, Action::West, Action::Stay};

constexpr int index_of(Action a) { return static_cast<int>(a); }
std::string_view to_string(Action a);
Action parse_action(std::string_view name);

/// Bit set over target candidate indices. Maps are limited to 64 candidates.
class TargetSet {
 public:
  static constexpr int kCapacity = 64;

  constexpr TargetSet() = default;
  constexpr explicit TargetSet(std::uint64_t bits) : bits_(bits) {}

  constexpr bool contains(int index) const { return index >= 0 && ((bits_ >> index) & 1U) != 0; }
  constexpr void insert(int index) {
    if (index >= 0) bits_ |= std::uint64_t{1} << index;
  }
  constexpr std::uint64_t bits() const { return bits_; }
  int size() const;

  friend constexpr bool operator==(TargetSet, TargetSet) = default;

 private:
  std::uint64_t bits_ = 0;
};

/// Static world: passable cells, candidate target locations and start cells.
///
/// Target and responder start candidates are stored in row-major order, so the
/// candidate index order agrees with CellId order. The constructor validates
/// every GridMap invariant (bounds, passability, distinctness, connectivity
/// from the drone start) and throws MapError on violation.
class GridMap {
 public:
  GridMap(int width, int height, std::vector<Position> blocked, std::vector<Position> target_candidates,
          Position drone_start, std::vector<Position> responder_start_candidates);

  int width() const { return width_; }
  int height() const { return height_; }
  int cell_count() const { return width_ * height_; }

  bool in_bounds(Position p) const { return p.x >= 0 && p.y >= 0 && p.x < width_ && p.y < height_; }
  bool passable(Position p) const { return in_bounds(p) && !blocked_[cell(p)]; }
  bool passable(CellId c) const { return c >= 0 && c < cell_count() && !blocked_[c]; }

  CellId cell(Position p) const { return p.y * width_ + p.x; }
  Position position(CellId c) const { return {c % width_, c / width_}; }

  /// Throws InvalidPositionError unless p is in bounds and passable.
  CellId checked_cell(Position p) const;

  CellId drone_start_cell() const { return drone_start_; }
  Position drone_start() const { return position(drone_start_); }
  std::span<const CellId> target_cells() const { return targets_; }
  std::span<const CellId> responder_start_cells() const { return responder_starts_; }
  std::vector<Position> target_candidates() const;
  std::vector<Position> responder_start_candidates() const;
  std::vector<Position> blocked_positions() const;

  int target_count() const { return static_cast<int>(targets_.size()); }
  /// Candidate index of c, or -1 when c is not a target candidate.
  int target_index(CellId c) const { return target_index_[c]; }

  /// Passable 4-neighbors in N, E, S, W order.
  std::span<const CellId> neighbor_cells(CellId c) const {
    return {neighbor_table_.data() + 4 * c, neighbor_count_[c]};
  }

  /// Cell reached by `a` from `c`; blocked or out-of-bounds moves stay at `c`.
  CellId apply(CellId c, Action a) const { return move_table_[c * kActionCount + index_of(a)]; }
  /// Bitmask over action indices: Stay plus every move into a passable cell.
  std::uint8_t legal_actions(CellId c) const { return legal_mask_[c]; }

  friend bool operator==(const GridMap& a, const GridMap& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.blocked_ == b.blocked_ && a.targets_ == b.targets_ &&
           a.drone_start_ == b.drone_start_ && a.responder_starts_ == b.responder_starts_;
  }

 private:
  void build_tables();
  void validate() const;

  int width_;
  int height_;
  std::vector<std::uint8_t> blocked_;
  std::vector<CellId> targets_;
  CellId drone_start_;
  std::vector<CellId> responder_starts_;
  std::vector<int> target_index_;
  std::vector<CellId> neighbor_table_;
  std::vector<std::size_t> neighbor_count_;
  std::vector<CellId> move_table_;
  std::vector<std::uint8_t> legal_mask_;
};

/// Passable 4-connected neighbors of p in N, E, S, W order.
std::vector<Position> neighbors(const GridMap& map, Position p);

/// All-pairs BFS step counts plus first-move tables toward every target candidate.
class CostTable {
 public:
  static constexpr int kUnreachable = 0xFFFF;

  int cost(CellId from, CellId to) const { return costs_[static_cast<std::size_t>(from) * cells_ + to]; }
  int cost(Position from, Position to) const;

  /// Step count from `from` to target candidate `target_index`.
  int cost_to_target(CellId from, int target_index) const { return cost(target_cells_[target_index], from); }

  /// First move of a shortest path toward the target candidate; Stay when
  /// already there or when unreachable.
  Action best_action(CellId from, int target_index) const {
    return static_cast<Action>(best_[static_cast<std::size_t>(target_index) * cells_ + from]);
  }
  /// First move of a shortest path toward an arbitrary cell.
  Action best_action_toward(CellId from, CellId to) const;
  std::optional<Action> best_action(Position from, Position target) const;

  int cell_count() const { return cells_; }

 private:
  friend CostTable compute_costs(const GridMap& map);

  int width_ = 0;
  int cells_ = 0;
  std::vector<CellId> moves_;
  std::vector<CellId> target_cells_;
  std::vector<std::uint16_t> costs_;
  std::vector<std::uint8_t> best_;
};

/// BFS from every passable cell. Ties in best_action follow N, E, S, W.
CostTable compute_costs(const GridMap& map);

enum class EnvironmentFamily { Small, Large, Cross, Building, Random };

std::string_view to_string(EnvironmentFamily f);
EnvironmentFamily parse_environment_family(std::string_view name);

/// Builds one of the five environment families. `seed` only affects Random.
GridMap make_environment(EnvironmentFamily family, std::uint64_t seed = 0);

int chebyshev_distance(Position a, Position b);

}  // namespace sar
