#include "sarpomcp/grid_world.hpp"

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <queue>
#include <random>
#include <string>

#include "embedded_maps.hpp"
#include "sarpomcp/errors.hpp"
#include "sarpomcp/map_io.hpp"

namespace sar {
namespace {

constexpr std::array<int, 4> kDx = {0, 1, 0, -1};
constexpr std::array<int, 4> kDy = {-1, 0, 1, 0};

std::string describe(Position p) { return "(" + std::to_string(p.x) + "," + std::to_string(p.y) + ")"; }

// BFS step counts from `source` over passable cells; unreachable cells keep `unreachable`.
void bfs_from(const GridMap& map, CellId source, std::uint16_t unreachable, std::span<std::uint16_t> out,
              std::vector<CellId>& queue) {
  std::fill(out.begin(), out.end(), unreachable);
  queue.clear();
  out[source] = 0;
  queue.push_back(source);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const CellId c = queue[head];
    const auto next_cost = static_cast<std::uint16_t>(out[c] + 1);
    for (CellId n : map.neighbor_cells(c)) {
      if (out[n] != unreachable) continue;
      out[n] = next_cost;
      queue.push_back(n);
    }
  }
}

}  // namespace

std::string_view to_string(Action a) {
  switch (a) {
    case Action::North: return "N";
    case Action::East: return "E";
    case Action::South: return "S";
    case Action::West: return "W";
    case Action::Stay: return "Stay";
  }
  return "?";
}

Action parse_action(std::string_view name) {
  for (Action a : kAllActions) {
    if (to_string(a) == name) return a;
  }
  throw std::invalid_argument("unknown action: " + std::string(name));
}

int TargetSet::size() const { return std::popcount(bits_); }

GridMap::GridMap(int width, int height, std::vector<Position> blocked, std::vector<Position> target_candidates,
                 Position drone_start, std::vector<Position> responder_start_candidates)
    : width_(width), height_(height) {
  if (width <= 0 || height <= 0) throw MapError("map dimensions must be positive");
  if (static_cast<long>(width) * height >= CostTable::kUnreachable) throw MapError("map has too many cells");
  blocked_.assign(static_cast<std::size_t>(width * height), 0);
  for (Position p : blocked) {
    if (!in_bounds(p)) throw MapError("blocked cell out of bounds: " + describe(p));
    blocked_[cell(p)] = 1;
  }

  auto to_cells = [&](const std::vector<Position>& ps, const char* what) {
    std::vector<CellId> cells;
    cells.reserve(ps.size());
    for (Position p : ps) {
      if (!passable(p)) throw MapError(std::string(what) + " is not passable: " + describe(p));
      cells.push_back(cell(p));
    }
    std::sort(cells.begin(), cells.end());
    if (std::adjacent_find(cells.begin(), cells.end()) != cells.end()) {
      throw MapError(std::string(what) + " list contains duplicates");
    }
    return cells;
  };
  targets_ = to_cells(target_candidates, "target candidate");
  responder_starts_ = to_cells(responder_start_candidates, "responder start candidate");
  if (!passable(drone_start)) throw MapError("drone start is not passable: " + describe(drone_start));
  drone_start_ = cell(drone_start);

  build_tables();
  validate();
}

void GridMap::build_tables() {
  const int cells = cell_count();
  target_index_.assign(cells, -1);
  for (std::size_t i = 0; i < targets_.size(); ++i) target_index_[targets_[i]] = static_cast<int>(i);

  neighbor_table_.assign(static_cast<std::size_t>(4 * cells), kNoCell);
  neighbor_count_.assign(cells, 0);
  move_table_.assign(static_cast<std::size_t>(kActionCount * cells), kNoCell);
  legal_mask_.assign(cells, 0);
  for (CellId c = 0; c < cells; ++c) {
    const Position p = position(c);
    for (int d = 0; d < 4; ++d) {
      const Position q{p.x + kDx[d], p.y + kDy[d]};
      const bool open = passable(q) && passable(c);
      move_table_[c * kActionCount + d] = open ? cell(q) : c;
      if (open) {
        neighbor_table_[4 * c + neighbor_count_[c]++] = cell(q);
        legal_mask_[c] |= static_cast<std::uint8_t>(1U << d);
      }
    }
    move_table_[c * kActionCount + index_of(Action::Stay)] = c;
    legal_mask_[c] |= static_cast<std::uint8_t>(1U << index_of(Action::Stay));
  }
}

void GridMap::validate() const {
  if (targets_.empty()) throw MapError("map has no target candidates");
  if (responder_starts_.empty()) throw MapError("map has no responder start candidates");
  if (targets_.size() > static_cast<std::size_t>(TargetSet::kCapacity)) {
    throw MapError("map has more than 64 target candidates");
  }
  for (CellId r : responder_starts_) {
    if (target_index_[r] >= 0) throw MapError("a cell is both a responder start and a target candidate");
    if (r == drone_start_) throw MapError("drone start coincides with a responder start candidate");
  }
  if (target_index_[drone_start_] >= 0) throw MapError("drone start coincides with a target candidate");

  std::vector<std::uint16_t> dist(static_cast<std::size_t>(cell_count()));
  std::vector<CellId> queue;
  bfs_from(*this, drone_start_, CostTable::kUnreachable, dist, queue);
  auto check = [&](CellId c, const char* what) {
    if (dist[c] == CostTable::kUnreachable) {
      throw MapError(std::string(what) + " unreachable from drone start: " + describe(position(c)));
    }
  };
  for (CellId t : targets_) check(t, "target candidate");
  for (CellId r : responder_starts_) check(r, "responder start candidate");
}

CellId GridMap::checked_cell(Position p) const {
  if (!in_bounds(p)) throw InvalidPositionError("position out of bounds: " + describe(p));
  if (!passable(p)) throw InvalidPositionError("position is blocked: " + describe(p));
  return cell(p);
}

std::vector<Position> GridMap::target_candidates() const {
  std::vector<Position> out;
  for (CellId c : targets_) out.push_back(position(c));
  return out;
}

std::vector<Position> GridMap::responder_start_candidates() const {
  std::vector<Position> out;
  for (CellId c : responder_starts_) out.push_back(position(c));
  return out;
}

std::vector<Position> GridMap::blocked_positions() const {
  std::vector<Position> out;
  for (CellId c = 0; c < cell_count(); ++c) {
    if (blocked_[c]) out.push_back(position(c));
  }
  return out;
}

std::vector<Position> neighbors(const GridMap& map, Position p) {
  const CellId c = map.checked_cell(p);
  std::vector<Position> out;
  for (CellId n : map.neighbor_cells(c)) out.push_back(map.position(n));
  return out;
}

int CostTable::cost(Position from, Position to) const {
  return cost(from.y * width_ + from.x, to.y * width_ + to.x);
}

Action CostTable::best_action_toward(CellId from, CellId to) const {
  const int here = cost(from, to);
  if (here == 0 || here == kUnreachable) return Action::Stay;
  for (int d = 0; d < 4; ++d) {
    const CellId next = moves_[from * kActionCount + d];
    if (next != from && cost(next, to) == here - 1) return static_cast<Action>(d);
  }
  return Action::Stay;
}

std::optional<Action> CostTable::best_action(Position from, Position target) const {
  const CellId f = from.y * width_ + from.x;
  const CellId t = target.y * width_ + target.x;
  if (f == t || cost(f, t) == kUnreachable) return std::nullopt;
  return best_action_toward(f, t);
}

CostTable compute_costs(const GridMap& map) {
  CostTable table;
  const int cells = map.cell_count();
  table.width_ = map.width();
  table.cells_ = cells;
  table.moves_.resize(static_cast<std::size_t>(kActionCount * cells));
  for (CellId c = 0; c < cells; ++c) {
    for (Action a : kAllActions) table.moves_[c * kActionCount + index_of(a)] = map.apply(c, a);
  }
  table.target_cells_.assign(map.target_cells().begin(), map.target_cells().end());
  table.costs_.assign(static_cast<std::size_t>(cells) * cells, CostTable::kUnreachable);

  std::vector<CellId> queue;
  for (CellId c = 0; c < cells; ++c) {
    if (!map.passable(c)) continue;
    bfs_from(map, c, CostTable::kUnreachable,
             std::span<std::uint16_t>(table.costs_.data() + static_cast<std::size_t>(c) * cells, cells), queue);
  }

  const auto targets = map.target_count();
  table.best_.assign(static_cast<std::size_t>(targets) * cells, static_cast<std::uint8_t>(Action::Stay));
  for (int t = 0; t < targets; ++t) {
    const CellId goal = table.target_cells_[t];
    for (CellId c = 0; c < cells; ++c) {
      if (!map.passable(c)) continue;
      table.best_[static_cast<std::size_t>(t) * cells + c] = static_cast<std::uint8_t>(table.best_action_toward(c, goal));
    }
  }
  return table;
}

std::string_view to_string(EnvironmentFamily f) {
  switch (f) {
    case EnvironmentFamily::Small: return "SE";
    case EnvironmentFamily::Large: return "LE";
    case EnvironmentFamily::Cross: return "CE";
    case EnvironmentFamily::Building: return "BUILDING";
    case EnvironmentFamily::Random: return "RANDOM";
  }
  return "?";
}

EnvironmentFamily parse_environment_family(std::string_view name) {
  for (auto f : {EnvironmentFamily::Small, EnvironmentFamily::Large, EnvironmentFamily::Cross,
                 EnvironmentFamily::Building, EnvironmentFamily::Random}) {
    if (to_string(f) == name) return f;
  }
  throw std::invalid_argument("unknown environment family: " + std::string(name));
}

int chebyshev_distance(Position a, Position b) { return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y)); }

namespace {

GridMap open_square(int size, int responder_count, int corner_block) {
  const int mid = size / 2;
  const Position center{mid, mid};
  std::vector<Position> responders;
  for (int d = 0; d < responder_count; ++d) responders.push_back({mid + kDx[d], mid + kDy[d]});
  std::vector<Position> targets;
  for (int cy : {0, size - corner_block}) {
    for (int cx : {0, size - corner_block}) {
      for (int dy = 0; dy < corner_block; ++dy) {
        for (int dx = 0; dx < corner_block; ++dx) targets.push_back({cx + dx, cy + dy});
      }
    }
  }
  return GridMap(size, size, {}, std::move(targets), center, std::move(responders));
}

struct Room {
  int x0, y0, w, h;

  Position center() const { return {x0 + w / 2, y0 + h / 2}; }
  bool overlaps_with_margin(const Room& o) const {
    return x0 - 1 <= o.x0 + o.w && o.x0 - 1 <= x0 + w && y0 - 1 <= o.y0 + o.h && o.y0 - 1 <= y0 + h;
  }
};

std::optional<GridMap> try_random_layout(std::mt19937_64& rng) {
  constexpr int kSize = 64;
  constexpr int kRooms = 6;
  constexpr int kPlacementAttempts = 500;
  std::uniform_int_distribution<int> extent(6, 12);

  std::vector<Room> rooms;
  for (int attempt = 0; attempt < kPlacementAttempts && static_cast<int>(rooms.size()) < kRooms; ++attempt) {
    const int w = extent(rng);
    const int h = extent(rng);
    std::uniform_int_distribution<int> px(1, kSize - w - 1);
    std::uniform_int_distribution<int> py(1, kSize - h - 1);
    const Room room{px(rng), py(rng), w, h};
    const bool clash = std::any_of(rooms.begin(), rooms.end(), [&](const Room& r) { return r.overlaps_with_margin(room); });
    if (!clash) rooms.push_back(room);
  }
  if (static_cast<int>(rooms.size()) < kRooms) return std::nullopt;

  std::vector<std::uint8_t> open(kSize * kSize, 0);
  auto carve = [&](int x, int y) { open[y * kSize + x] = 1; };
  // Axis-aligned segments only.
  auto carve_segment = [&](Position p, Position q) {
    for (int y = std::min(p.y, q.y); y <= std::max(p.y, q.y); ++y) {
      for (int x = std::min(p.x, q.x); x <= std::max(p.x, q.x); ++x) carve(x, y);
    }
  };
  for (const Room& r : rooms) {
    for (int y = r.y0; y < r.y0 + r.h; ++y) {
      for (int x = r.x0; x < r.x0 + r.w; ++x) carve(x, y);
    }
  }
  // L-shaped corridors between consecutive rooms.
  std::bernoulli_distribution horizontal_first(0.5);
  for (int i = 0; i + 1 < kRooms; ++i) {
    const Position a = rooms[i].center();
    const Position b = rooms[i + 1].center();
    const Position corner = horizontal_first(rng) ? Position{b.x, a.y} : Position{a.x, b.y};
    carve_segment(a, corner);
    carve_segment(corner, b);
  }

  const Position drone = rooms.front().center();
  std::vector<Position> responders;
  for (int d = 0; d < 4; ++d) {
    const Position q{drone.x + kDx[d], drone.y + kDy[d]};
    if (open[q.y * kSize + q.x]) responders.push_back(q);
  }
  std::vector<Position> targets;
  for (const Room& r : rooms) {
    std::uniform_int_distribution<int> tx(r.x0, r.x0 + r.w - 1);
    std::uniform_int_distribution<int> ty(r.y0, r.y0 + r.h - 1);
    Position t{};
    do {
      t = {tx(rng), ty(rng)};
    } while (t == drone || std::find(responders.begin(), responders.end(), t) != responders.end());
    targets.push_back(t);
  }

  std::vector<Position> blocked;
  for (int y = 0; y < kSize; ++y) {
    for (int x = 0; x < kSize; ++x) {
      if (!open[y * kSize + x]) blocked.push_back({x, y});
    }
  }
  try {
    return GridMap(kSize, kSize, std::move(blocked), std::move(targets), drone, std::move(responders));
  } catch (const MapError&) {
    return std::nullopt;
  }
}

}  // namespace

GridMap make_environment(EnvironmentFamily family, std::uint64_t seed) {
  switch (family) {
    case EnvironmentFamily::Small: return open_square(5, 2, 1);
    case EnvironmentFamily::Large: return open_square(11, 4, 2);
    case EnvironmentFamily::Cross: return parse_map(detail::kCrossMap);
    case EnvironmentFamily::Building: return parse_map(detail::kBuildingMap);
    case EnvironmentFamily::Random: {
      constexpr int kMaxLayouts = 32;
      std::mt19937_64 rng(seed);
      for (int i = 0; i < kMaxLayouts; ++i) {
        if (auto map = try_random_layout(rng)) return std::move(*map);
      }
      throw MapError("random environment generation failed for seed " + std::to_string(seed));
    }
  }
  throw MapError("unknown environment family");
}

}  // namespace sar
