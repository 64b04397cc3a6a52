#ifndef ROUTELINK_CLI_HPP
#define ROUTELINK_CLI_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "routelink/estimator.hpp"
#include "routelink/reliability.hpp"

namespace routelink {

/// Parsed run configuration. All paths are resolved relative to the config
/// file's directory. See README for the JSON schema.
struct RunConfig {
  std::string network_path;
  std::vector<std::string> observation_paths;
  std::string schedule_path; // empty when absent
  std::string out_dir = "out";

  SolverConfig solver;
  McConfig mc;
  // When set, reliability treats the fitted parameters as exact (Sigma = 0),
  // so the travel-time distribution is purely the fitted log-normal.
  bool mc_zero_uncertainty = false;

  double indep_threshold = 0.05;
  int indep_grid_resolution = 1000;

  struct SimulateConfig {
    std::vector<double> theta_star;
    int link_days = 40;
    int route_days = 16;
    std::uint64_t seed = 7;
    std::string generator = "model"; // "model" or "link-sum"
    std::string out_prefix = "sim";
  } simulate;
  bool has_simulate = false;
};

RunConfig load_run_config(const std::string& path);

/// Replaces every seed in the config (solver, mc, simulate) with one master
/// seed; used by the --seed flag.
void override_seeds(RunConfig& cfg, std::uint64_t seed);

/// Subcommand bodies. Each throws on any failure; outputs are staged in
/// memory and written file-by-file via temp-and-rename, so no partial file
/// is ever visible.
void cmd_estimate(const RunConfig& cfg);
void cmd_reliability(const RunConfig& cfg, const std::string& route_spec);
void cmd_validate(const RunConfig& cfg, int route_id);
void cmd_simulate(const RunConfig& cfg);
void cmd_test_independence(const RunConfig& cfg);

} // namespace routelink

#endif
