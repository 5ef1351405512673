#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sarpomcp/harness.hpp"

namespace sar {

// Experiment configs are JSON objects:
//
//   {"environment": "SE", "env_seed": 0, "map_file": "", "trials": 100, "master_seed": 1,
//    "model":   {"p_still": 0.5, "max_steps": 16, "terminal_radius": 0},
//    "planner": {"num_samples": 1000, "max_depth": 14, "exploration_strategy": "dfES", ...}}
//
// Every key is optional; unknown keys raise ConfigError. model.max_steps
// defaults to default_max_steps(environment).

ExperimentConfig parse_experiment_config(std::string_view json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
std::string to_json(const ExperimentConfig& config);

// Sweep grids:
//
//   {"base": {...config...},
//    "axes": {"planner.exploration_strategy": ["dfES", "chES"], "planner.num_samples": [100, 1000]},
//    "configs": [{...partial config...}, ...]}
//
// Each entry of "configs" (or the base alone when absent) is merge-patched onto
// "base", then expanded over the cartesian product of "axes". Axis keys are
// dotted paths into the config object.

std::vector<ExperimentConfig> parse_sweep_grid(std::string_view json_text);
std::vector<ExperimentConfig> load_sweep_grid(const std::filesystem::path& path);

}  // namespace sar
