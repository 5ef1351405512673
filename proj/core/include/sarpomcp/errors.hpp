#pragma once

#include <stdexcept>
#include <string>

namespace sar {

/// Position outside the map or on a blocked cell.
class InvalidPositionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed map file or a map that violates the GridMap invariants.
class MapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when the episode reaches a state the caller should have prevented,
/// e.g. asking for a rollout target after every candidate was visited.
class EpisodeLogicError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace sar
