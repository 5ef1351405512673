// sarsim: run experiments, sweeps and map generation from the command line.

#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "sarpomcp/config_io.hpp"
#include "sarpomcp/harness.hpp"
#include "sarpomcp/map_io.hpp"

namespace {

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(10);
  return out;
}

void report(const sar::ExperimentResult& r) {
  const auto& a = r.aggregate;
  std::cerr << sar::to_string(r.config.environment) << ' ' << sar::to_string(r.config.planner.exploration_strategy)
            << " samples=" << r.config.planner.num_samples << " success=" << a.success_rate
            << " steps=" << a.mean_steps << " robs=" << a.total_robs << " time=" << a.total_time_s << "s";
  if (a.failed_trials > 0) std::cerr << " errors=" << a.failed_trials;
  if (!r.error.empty()) std::cerr << " FAILED: " << r.error;
  std::cerr << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Search-and-rescue POMCP simulator"};
  app.require_subcommand(1);

  const int hardware = static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
  int threads = hardware;
  app.add_option("-j,--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  std::string config_path, grid_path, out_path, trials_path;
  auto* run = app.add_subcommand("run", "Run one experiment configuration");
  run->add_option("--config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_path, "Aggregate CSV output")->required();
  run->add_option("--trials-out", trials_path, "Optional per-trial CSV output");

  auto* sweep = app.add_subcommand("sweep", "Run a grid of configurations");
  sweep->add_option("--grid", grid_path, "JSON sweep grid")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", out_path, "Aggregate CSV output")->required();
  sweep->add_option("--trials-out", trials_path, "Optional per-trial CSV output");

  std::string family_name;
  std::uint64_t seed = 0;
  std::string map_path;
  auto* gen = app.add_subcommand("gen-map", "Write an environment as an ASCII map");
  gen->add_option("--family", family_name, "SE, LE, CE, BUILDING or RANDOM")
      ->required()
      ->check(CLI::IsMember({"SE", "LE", "CE", "BUILDING", "RANDOM"}));
  gen->add_option("--seed", seed, "Generator seed (RANDOM only)");
  gen->add_option("--out", map_path, "Output map file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    std::vector<sar::ExperimentResult> results;
    if (*run) {
      const sar::ExperimentConfig config = sar::load_experiment_config(config_path);
      results.push_back(sar::run_experiment(config, threads));
    } else if (*sweep) {
      results = sar::sweep(sar::load_sweep_grid(grid_path), threads);
    } else if (*gen) {
      sar::save_map(map_path, sar::make_environment(sar::parse_environment_family(family_name), seed));
      return 0;
    }

    for (const auto& r : results) report(r);
    auto out = open_output(out_path);
    sar::write_csv(out, results);
    if (!trials_path.empty()) {
      auto trials_out = open_output(trials_path);
      sar::write_trials_csv(trials_out, results);
    }
    const bool any_error = std::any_of(results.begin(), results.end(), [](const sar::ExperimentResult& r) {
      return !r.error.empty() || r.aggregate.failed_trials > 0;
    });
    return any_error ? 2 : 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
