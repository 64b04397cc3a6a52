#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "routelink/cli.hpp"
#include "routelink/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Link success probability estimation and travel-time "
               "reliability for road networks"};
  app.require_subcommand(1);

  std::string config_path, out_dir, route_spec;
  std::uint64_t seed = 0;
  bool seed_set = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run configuration (JSON)")
        ->required();
    sub->add_option("--out-dir", out_dir, "override the output directory");
    sub->add_option("--seed", seed, "override every seed in the config")
        ->each([&](const std::string&) { seed_set = true; });
  };

  CLI::App* estimate = app.add_subcommand(
      "estimate", "fit link success probabilities by maximum likelihood");
  add_common(estimate);

  CLI::App* reliability = app.add_subcommand(
      "reliability", "travel-time distribution and reliability measures");
  add_common(reliability);
  reliability
      ->add_option("--route", route_spec,
                   "route id or comma-separated node path")
      ->required();
  bool zero_uncertainty = false;
  reliability->add_flag("--zero-uncertainty", zero_uncertainty,
                        "treat the fitted parameters as exact (no "
                        "estimation-uncertainty mixing)");

  CLI::App* validate = app.add_subcommand(
      "validate", "split-sample check of a route's fitted mean");
  add_common(validate);
  validate->add_option("--route", route_spec, "route id")->required();

  CLI::App* simulate =
      app.add_subcommand("simulate", "generate synthetic observations");
  add_common(simulate);

  CLI::App* indep = app.add_subcommand(
      "test-independence", "exact independence tests for link pairs");
  add_common(indep);

  CLI11_PARSE(app, argc, argv);

  try {
    routelink::RunConfig cfg = routelink::load_run_config(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (seed_set) routelink::override_seeds(cfg, seed);

    if (estimate->parsed()) {
      routelink::cmd_estimate(cfg);
    } else if (reliability->parsed()) {
      if (zero_uncertainty) cfg.mc_zero_uncertainty = true;
      routelink::cmd_reliability(cfg, route_spec);
    } else if (validate->parsed()) {
      routelink::cmd_validate(cfg, std::stoi(route_spec));
    } else if (simulate->parsed()) {
      routelink::cmd_simulate(cfg);
    } else if (indep->parsed()) {
      routelink::cmd_test_independence(cfg);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
