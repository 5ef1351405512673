#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "sarpomcp/grid_world.hpp"

namespace sar {

// ASCII map format, one row per line:
//   '#' blocked, '.' passable, 'D' drone start,
//   'R' responder start candidate, 'T' target candidate.
// Exactly one 'D' is required; ragged rows are rejected.

GridMap parse_map(std::string_view text);
std::string format_map(const GridMap& map);

GridMap load_map(const std::filesystem::path& path);
void save_map(const std::filesystem::path& path, const GridMap& map);

}  // namespace sar
