#include "sarpomcp/map_io.hpp"

#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

#include "sarpomcp/errors.hpp"

namespace sar {

GridMap parse_map(std::string_view text) {
  std::vector<std::string_view> rows;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view row = text.substr(start, end - start);
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    rows.push_back(row);
    start = end + 1;
  }
  while (!rows.empty() && rows.back().empty()) rows.pop_back();
  if (rows.empty()) throw MapError("map is empty");

  const int width = static_cast<int>(rows.front().size());
  const int height = static_cast<int>(rows.size());
  if (width == 0) throw MapError("map row 0 is empty");

  std::vector<Position> blocked;
  std::vector<Position> targets;
  std::vector<Position> responders;
  std::optional<Position> drone;
  for (int y = 0; y < height; ++y) {
    if (static_cast<int>(rows[y].size()) != width) {
      throw MapError("ragged map: row " + std::to_string(y) + " has " + std::to_string(rows[y].size()) +
                     " cells, expected " + std::to_string(width));
    }
    for (int x = 0; x < width; ++x) {
      const Position p{x, y};
      switch (rows[y][x]) {
        case '#': blocked.push_back(p); break;
        case '.': break;
        case 'T': targets.push_back(p); break;
        case 'R': responders.push_back(p); break;
        case 'D':
          if (drone) throw MapError("map has more than one drone start");
          drone = p;
          break;
        default:
          throw MapError("unknown map symbol '" + std::string(1, rows[y][x]) + "' at row " + std::to_string(y));
      }
    }
  }
  if (!drone) throw MapError("map has no drone start");
  return GridMap(width, height, std::move(blocked), std::move(targets), *drone, std::move(responders));
}

std::string format_map(const GridMap& map) {
  std::string out;
  out.reserve(static_cast<std::size_t>((map.width() + 1) * map.height()));
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      const CellId c = map.cell({x, y});
      char symbol = map.passable(c) ? '.' : '#';
      if (map.target_index(c) >= 0) symbol = 'T';
      for (CellId r : map.responder_start_cells()) {
        if (r == c) symbol = 'R';
      }
      if (c == map.drone_start_cell()) symbol = 'D';
      out.push_back(symbol);
    }
    out.push_back('\n');
  }
  return out;
}

GridMap load_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MapError("cannot open map file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_map(buffer.str());
}

void save_map(const std::filesystem::path& path, const GridMap& map) {
  std::ofstream out(path);
  if (!out) throw MapError("cannot write map file " + path.string());
  out << format_map(map);
}

}  // namespace sar
