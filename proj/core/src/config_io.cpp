#include "sarpomcp/config_io.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"
#include "sarpomcp/errors.hpp"

namespace sar {
namespace {

using nlohmann::json;

void reject_unknown_keys(const json& object, std::initializer_list<std::string_view> allowed, const char* where) {
  if (!object.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
  for (const auto& [key, value] : object.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(std::string("unknown key '") + key + "' in " + where);
    }
  }
}

template <typename T>
void read(const json& object, const char* key, T& out) {
  const auto it = object.find(key);
  if (it == object.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

template <typename Enum, typename Parse>
void read_enum(const json& object, const char* key, Enum& out, Parse parse) {
  const auto it = object.find(key);
  if (it == object.end()) return;
  if (!it->is_string()) throw ConfigError(std::string("'") + key + "' must be a string");
  try {
    out = parse(it->template get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig from_json(const json& j) {
  reject_unknown_keys(j, {"environment", "env_seed", "map_file", "trials", "master_seed", "model", "planner"},
                      "config");
  ExperimentConfig c;
  read_enum(j, "environment", c.environment, parse_environment_family);
  read(j, "env_seed", c.env_seed);
  read(j, "map_file", c.map_file);
  read(j, "trials", c.trials);
  read(j, "master_seed", c.master_seed);

  c.model.max_steps = default_max_steps(c.environment);
  if (const auto it = j.find("model"); it != j.end()) {
    const json& m = *it;
    reject_unknown_keys(m, {"p_still", "max_steps", "terminal_radius"}, "model");
    read(m, "p_still", c.model.p_still);
    read(m, "max_steps", c.model.max_steps);
    read(m, "terminal_radius", c.model.terminal_radius);
  }

  if (const auto it = j.find("planner"); it != j.end()) {
    const json& p = *it;
    reject_unknown_keys(p,
                        {"num_samples", "max_depth", "ucb_c", "gamma", "exploration_strategy", "entropy_mode",
                         "entropy_coeff", "rr_bonus", "rollout_policy", "rollout_action_mode", "belief_filter",
                         "truncation_size"},
                        "planner");
    PlannerConfig& pc = c.planner;
    read(p, "num_samples", pc.num_samples);
    read(p, "max_depth", pc.max_depth);
    read(p, "ucb_c", pc.ucb_c);
    read(p, "gamma", pc.gamma);
    read_enum(p, "exploration_strategy", pc.exploration_strategy, parse_exploration_strategy);
    read_enum(p, "entropy_mode", pc.entropy_mode, parse_entropy_mode);
    read(p, "entropy_coeff", pc.entropy_coeff);
    read(p, "rr_bonus", pc.rr_bonus);
    read_enum(p, "rollout_policy", pc.rollout_policy, parse_rollout_policy);
    read_enum(p, "rollout_action_mode", pc.rollout_action_mode, parse_rollout_action_mode);
    read_enum(p, "belief_filter", pc.belief_filter, parse_filter_kind);
    read(p, "truncation_size", pc.truncation_size);
  }
  c.validate();
  return c;
}

json parse_text(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void expand_axes(const json& config, const std::vector<std::pair<std::string, json>>& axes, std::size_t axis,
                 std::vector<ExperimentConfig>& out) {
  if (axis == axes.size()) {
    out.push_back(from_json(config));
    return;
  }
  const auto& [path, values] = axes[axis];
  for (const json& value : values) {
    json next = config;
    std::string pointer = "/" + path;
    std::replace(pointer.begin(), pointer.end(), '.', '/');
    next[json::json_pointer(pointer)] = value;
    expand_axes(next, axes, axis + 1, out);
  }
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view json_text) { return from_json(parse_text(json_text)); }

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return parse_experiment_config(read_file(path));
}

std::string to_json(const ExperimentConfig& c) {
  const PlannerConfig& p = c.planner;
  json j = {
      {"environment", to_string(c.environment)},
      {"env_seed", c.env_seed},
      {"map_file", c.map_file},
      {"trials", c.trials},
      {"master_seed", c.master_seed},
      {"model", {{"p_still", c.model.p_still}, {"max_steps", c.model.max_steps},
                 {"terminal_radius", c.model.terminal_radius}}},
      {"planner",
       {{"num_samples", p.num_samples},
        {"max_depth", p.max_depth},
        {"ucb_c", p.ucb_c},
        {"gamma", p.gamma},
        {"exploration_strategy", to_string(p.exploration_strategy)},
        {"entropy_mode", to_string(p.entropy_mode)},
        {"entropy_coeff", p.entropy_coeff},
        {"rr_bonus", p.rr_bonus},
        {"rollout_policy", to_string(p.rollout_policy)},
        {"rollout_action_mode", to_string(p.rollout_action_mode)},
        {"belief_filter", to_string(p.belief_filter)},
        {"truncation_size", p.truncation_size}}},
  };
  return j.dump(2);
}

std::vector<ExperimentConfig> parse_sweep_grid(std::string_view json_text) {
  const json grid = parse_text(json_text);
  reject_unknown_keys(grid, {"base", "axes", "configs"}, "sweep grid");
  const json base = grid.value("base", json::object());

  std::vector<std::pair<std::string, json>> axes;
  if (const auto it = grid.find("axes"); it != grid.end()) {
    if (!it->is_object()) throw ConfigError("sweep axes must be an object");
    for (const auto& [path, values] : it->items()) {
      if (!values.is_array() || values.empty()) {
        throw ConfigError("sweep axis '" + path + "' must be a non-empty array");
      }
      axes.emplace_back(path, values);
    }
  }

  std::vector<json> variants;
  if (const auto it = grid.find("configs"); it != grid.end()) {
    if (!it->is_array() || it->empty()) throw ConfigError("sweep configs must be a non-empty array");
    for (const json& patch : *it) {
      json merged = base;
      merged.merge_patch(patch);
      variants.push_back(std::move(merged));
    }
  } else {
    variants.push_back(base);
  }

  std::vector<ExperimentConfig> out;
  for (const json& v : variants) expand_axes(v, axes, 0, out);
  return out;
}

std::vector<ExperimentConfig> load_sweep_grid(const std::filesystem::path& path) {
  return parse_sweep_grid(read_file(path));
}

}  // namespace sar
