#include "routelink/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "routelink/bridge.hpp"
#include "routelink/errors.hpp"
#include "routelink/simgen.hpp"
#include "routelink/stats.hpp"

namespace routelink {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& dir, const std::string& name,
                       const std::string& content) {
  fs::create_directories(dir);
  const fs::path tmp = dir / (".tmp-" + name);
  const fs::path dst = dir / name;
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, dst);
}

// Staged outputs: everything is rendered before the first byte hits disk.
struct OutputBatch {
  fs::path dir;
  std::vector<std::pair<std::string, std::string>> files;

  void add(const std::string& name, std::string content) {
    files.emplace_back(name, std::move(content));
  }
  void commit() {
    for (auto& [name, content] : files)
      write_file_atomic(dir, name, content);
  }
};

NetworkModel load_net(const RunConfig& cfg) {
  if (cfg.network_path.empty()) throw Error("config has no network path");
  return load_network(read_file(cfg.network_path));
}

void load_records(const RunConfig& cfg, std::vector<LinkObservation>& links,
                  std::vector<RouteObservation>& routes) {
  if (cfg.observation_paths.empty())
    throw Error("config lists no observation files");
  for (const auto& path : cfg.observation_paths)
    parse_observation_records(read_file(path), links, routes);
}

ObservationSet load_obs(const RunConfig& cfg, const NetworkModel& net) {
  std::vector<LinkObservation> links;
  std::vector<RouteObservation> routes;
  load_records(cfg, links, routes);
  return ObservationSet::from_records(net, links, routes);
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

std::string route_label(const NetworkModel& net, const Route& route) {
  if (route.link_ids.empty()) return "(empty)";
  std::string s = net.link(route.link_ids.front()).from_node;
  for (int lid : route.link_ids) {
    s += "-";
    s += net.link(lid).to_node;
  }
  return s;
}

// Route spec: a stored route id ("3") or a comma-separated node path
// ("M,I,J,F,G") resolved against the network as an ad-hoc route.
Route resolve_route(const NetworkModel& net, const std::string& spec) {
  if (spec.empty()) throw Error("empty route spec");
  const bool digits =
      std::all_of(spec.begin(), spec.end(),
                  [](unsigned char ch) { return std::isdigit(ch); });
  if (digits) return net.route(std::stoi(spec));
  std::vector<std::string> nodes;
  std::string cur;
  for (char ch : spec) {
    if (ch == ',') {
      nodes.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  nodes.push_back(cur);
  return net.route_from_nodes(nodes);
}

std::string sanitize_tag(const std::string& spec) {
  std::string tag;
  for (char ch : spec)
    tag += std::isalnum(static_cast<unsigned char>(ch)) ? ch : '-';
  return tag;
}

} // namespace

RunConfig load_run_config(const std::string& path) {
  const fs::path cfg_path(path);
  json j;
  try {
    j = json::parse(read_file(cfg_path));
  } catch (const json::exception& e) {
    throw ParseError("config " + path + ": " + e.what());
  }
  const fs::path base = cfg_path.parent_path();
  auto resolve = [&](const std::string& p) {
    return fs::path(p).is_absolute() ? p : (base / p).string();
  };

  RunConfig cfg;
  try {
    if (!j.contains("network")) throw Error("config needs a \"network\" key");
    cfg.network_path = resolve(j.at("network").get<std::string>());
    if (j.contains("observations")) {
      if (j["observations"].is_string())
        cfg.observation_paths.push_back(
            resolve(j["observations"].get<std::string>()));
      else
        for (const auto& item : j["observations"])
          cfg.observation_paths.push_back(resolve(item.get<std::string>()));
    }
    if (j.contains("schedule"))
      cfg.schedule_path = resolve(j.at("schedule").get<std::string>());
    if (j.contains("out_dir"))
      cfg.out_dir = resolve(j.at("out_dir").get<std::string>());

    if (j.contains("solver")) {
      const auto& s = j["solver"];
      if (s.contains("tol")) cfg.solver.tol = s["tol"].get<double>();
      if (s.contains("max_iter"))
        cfg.solver.max_iter = s["max_iter"].get<int>();
      if (s.contains("starts")) cfg.solver.starts = s["starts"].get<int>();
      if (s.contains("seed"))
        cfg.solver.seed = s["seed"].get<std::uint64_t>();
      if (s.contains("perturb_sd"))
        cfg.solver.perturb_sd = s["perturb_sd"].get<double>();
    }
    if (j.contains("mc")) {
      const auto& m = j["mc"];
      if (m.contains("n_samples"))
        cfg.mc.n_samples = m["n_samples"].get<long>();
      if (m.contains("step")) cfg.mc.step = m["step"].get<double>();
      if (m.contains("bounds")) {
        cfg.mc.a = m["bounds"].at(0).get<double>();
        cfg.mc.b = m["bounds"].at(1).get<double>();
      }
      if (m.contains("seed")) cfg.mc.seed = m["seed"].get<std::uint64_t>();
      if (m.contains("tail_mass_target"))
        cfg.mc.tail_mass_target = m["tail_mass_target"].get<double>();
      if (m.contains("zero_uncertainty"))
        cfg.mc_zero_uncertainty = m["zero_uncertainty"].get<bool>();
    }
    if (j.contains("independence")) {
      const auto& t = j["independence"];
      if (t.contains("threshold"))
        cfg.indep_threshold = t["threshold"].get<double>();
      if (t.contains("grid_resolution"))
        cfg.indep_grid_resolution = t["grid_resolution"].get<int>();
    }
    if (j.contains("simulate")) {
      const auto& s = j["simulate"];
      cfg.has_simulate = true;
      if (s.contains("theta_star"))
        cfg.simulate.theta_star = s["theta_star"].get<std::vector<double>>();
      if (s.contains("link_days"))
        cfg.simulate.link_days = s["link_days"].get<int>();
      if (s.contains("route_days"))
        cfg.simulate.route_days = s["route_days"].get<int>();
      if (s.contains("seed"))
        cfg.simulate.seed = s["seed"].get<std::uint64_t>();
      if (s.contains("generator"))
        cfg.simulate.generator = s["generator"].get<std::string>();
      if (s.contains("out_prefix"))
        cfg.simulate.out_prefix = s["out_prefix"].get<std::string>();
    }
  } catch (const json::exception& e) {
    throw ParseError("config " + path + ": " + e.what());
  }
  return cfg;
}

void override_seeds(RunConfig& cfg, std::uint64_t seed) {
  cfg.solver.seed = seed;
  cfg.mc.seed = seed;
  cfg.simulate.seed = seed;
}

void cmd_estimate(const RunConfig& cfg) {
  NetworkModel net = load_net(cfg);
  ObservationSet obs = load_obs(cfg, net);
  FitResult fr = fit(net, obs, cfg.solver);

  json out;
  out["converged"] = fr.converged;
  out["loglik"] = fr.loglik;
  out["score_norm_inf"] = fr.score_norm_inf;
  out["starts_used"] = fr.starts_used;
  out["boundary_links"] = fr.boundary_links;
  out["fim_rank"] = fr.fim_rank;
  out["fim_condition_estimate"] = fr.fim.condition_estimate;
  json theta = json::array(), sample_mean = json::array();
  for (int j = 0; j < net.num_links(); ++j) {
    theta.push_back(fr.theta_hat.rho[j]);
    if (obs.trials[j] > 0)
      sample_mean.push_back(static_cast<double>(obs.successes[j]) /
                            static_cast<double>(obs.trials[j]));
    else
      sample_mean.push_back(nullptr);
  }
  out["theta_hat"] = theta;
  out["sample_mean"] = sample_mean;
  out["successes"] = obs.successes;
  out["trials"] = obs.trials;
  out["fim"] = matrix_to_json(fr.fim.F);
  out["fim_inverse"] = matrix_to_json(fr.fim_inverse);

  std::string table;
  table += "Link No. | Sample Mean |   MLE  | Relative Difference\n";
  table += "---------+-------------+--------+--------------------\n";
  char line[128];
  for (int j = 0; j < net.num_links(); ++j) {
    const double mle = fr.theta_hat.rho[j];
    if (obs.trials[j] > 0) {
      const double mean = static_cast<double>(obs.successes[j]) /
                          static_cast<double>(obs.trials[j]);
      if (mean > 0.0)
        std::snprintf(line, sizeof(line),
                      "%8d | %11.2f | %6.2f | %+18.1f%%\n", j + 1, mean, mle,
                      (mle - mean) / mean * 100.0);
      else
        std::snprintf(line, sizeof(line),
                      "%8d | %11.2f | %6.2f | %19s\n", j + 1, mean, mle,
                      "n/a");
    } else {
      std::snprintf(line, sizeof(line), "%8d | %11s | %6.2f | %19s\n", j + 1,
                    "n/a", mle, "n/a");
    }
    table += line;
  }

  std::string report;
  report += "Maximum likelihood estimates from link and route data\n\n";
  report += "converged:        ";
  report += fr.converged ? "yes" : "no";
  report += "\n";
  report += "log-likelihood:   " + fmt("%.10g", fr.loglik) + "\n";
  report += "score inf-norm:   " + fmt("%.3g", fr.score_norm_inf) + "\n";
  report += "starts used:      " + std::to_string(fr.starts_used) + "\n";
  report += "links at clamp:   " + std::to_string(fr.boundary_links.size()) +
            "\n\n";
  report += table;

  for (const auto& w : obs.warnings) report += "\nwarning: " + w + "\n";

  OutputBatch batch;
  batch.dir = cfg.out_dir;
  batch.add("fit.json", out.dump(2) + "\n");
  batch.add("estimate_report.txt", report);
  batch.commit();
}

void cmd_reliability(const RunConfig& cfg, const std::string& route_spec) {
  NetworkModel net = load_net(cfg);
  ObservationSet obs = load_obs(cfg, net);
  FitResult fr = fit(net, obs, cfg.solver);
  if (!fr.converged) throw Error("fit did not converge; cannot proceed");

  Route route = resolve_route(net, route_spec);
  RouteUncertainty unc = route_uncertainty(net, route, fr);
  if (cfg.mc_zero_uncertainty) {
    unc.Sigma.setZero();
    unc.sigma_11_2 = 0.0;
  }
  TravelTimePmf pmf = generate_pmf(unc, cfg.mc);
  ReliabilityReport rep = measures(pmf);

  const std::string tag = sanitize_tag(route_spec);
  const std::string label =
      (route.id > 0 ? "route " + std::to_string(route.id) : "ad-hoc route") +
      " (" + route_label(net, route) + ")";

  json out;
  out["route"] = label;
  out["h1_hat"] = unc.h1_hat;
  out["h2_hat"] = unc.h2_hat;
  out["sigma"] = {{unc.Sigma(0, 0), unc.Sigma(0, 1)},
                  {unc.Sigma(1, 0), unc.Sigma(1, 1)}};
  out["sigma_11_2"] = unc.sigma_11_2;
  out["total_mass"] = pmf.total_mass;
  out["rejection_rate"] = pmf.rejection_rate;
  out["pct95_s"] = rep.pct95_s;
  out["pct15_s"] = rep.pct15_s;
  out["mean_s"] = rep.mean_s;
  out["std_s"] = rep.std_s;
  out["coeff_var"] = rep.coeff_var;
  out["buffer_index"] = rep.buffer_index;
  out["planning_index"] = rep.planning_index;

  std::string txt;
  txt += "Travel time reliability for " + label + "\n\n";
  txt += "95th percentile travel time (min)  " +
         fmt("%8.2f", rep.pct95_s / 60.0) + "\n";
  txt += "Standard deviation (min)           " +
         fmt("%8.2f", rep.std_s / 60.0) + "\n";
  txt += "Coefficient of variation           " + fmt("%8.2f", rep.coeff_var) +
         "\n";
  txt += "Buffer index                       " +
         fmt("%8.2f", rep.buffer_index) + "\n";
  txt += "Planning time index                " +
         fmt("%8.2f", rep.planning_index) + "\n";

  OutputBatch batch;
  batch.dir = cfg.out_dir;
  batch.add("pmf_" + tag + ".csv", pmf_to_csv(pmf, cfg.mc));
  batch.add("reliability_" + tag + ".json", out.dump(2) + "\n");
  batch.add("reliability_" + tag + ".txt", txt);
  batch.commit();
}

void cmd_validate(const RunConfig& cfg, int route_id) {
  NetworkModel net = load_net(cfg);
  std::vector<LinkObservation> links;
  std::vector<RouteObservation> routes;
  load_records(cfg, links, routes);
  ValidationReport rep = validate_split(net, routes, links, route_id,
                                        cfg.solver.seed, cfg.solver);

  json out;
  out["route_id"] = rep.route_id;
  out["n_train"] = rep.n_train;
  out["n_test"] = rep.n_test;
  out["mle_mean_s"] = rep.mle_mean_s;
  out["mle_std_s"] = rep.mle_std_s;
  out["train_mean_s"] = rep.train_mean_s;
  out["train_se_s"] = rep.train_se_s;
  out["test_mean_s"] = rep.test_mean_s;
  out["test_se_s"] = rep.test_se_s;
  out["within_1se"] = rep.within_1se;
  out["within_2se"] = rep.within_2se;

  char line[160];
  std::string txt;
  std::snprintf(line, sizeof(line),
                "Split validation, route %d (train %d / test %d)\n\n",
                rep.route_id, rep.n_train, rep.n_test);
  txt += line;
  txt += "                     Mean travel time (min)   "
         "Std of mean estimate (min)\n";
  std::snprintf(line, sizeof(line), "Maximum likelihood %24.2f %28.2f\n",
                rep.mle_mean_s / 60.0, rep.mle_std_s / 60.0);
  txt += line;
  std::snprintf(line, sizeof(line), "Training sample    %24.2f %28.2f\n",
                rep.train_mean_s / 60.0, rep.train_se_s / 60.0);
  txt += line;
  std::snprintf(line, sizeof(line), "Testing sample     %24.2f %28.2f\n",
                rep.test_mean_s / 60.0, rep.test_se_s / 60.0);
  txt += line;
  txt += "\nMLE within 1 SE of held-out mean: ";
  txt += rep.within_1se ? "yes" : "no";
  txt += "\nMLE within 2 SE of held-out mean: ";
  txt += rep.within_2se ? "yes" : "no";
  txt += "\n";

  OutputBatch batch;
  batch.dir = cfg.out_dir;
  const std::string tag = std::to_string(route_id);
  batch.add("validate_route" + tag + ".json", out.dump(2) + "\n");
  batch.add("validate_route" + tag + ".txt", txt);
  batch.commit();
}

void cmd_simulate(const RunConfig& cfg) {
  if (!cfg.has_simulate)
    throw Error("config has no \"simulate\" block");
  NetworkModel net = load_net(cfg);
  const auto& sim = cfg.simulate;
  if (static_cast<int>(sim.theta_star.size()) != net.num_links())
    throw Error("simulate.theta_star needs one entry per link");
  Eigen::VectorXd theta(net.num_links());
  for (int j = 0; j < net.num_links(); ++j) theta[j] = sim.theta_star[j];
  GroundTruth gt = make_ground_truth(net, theta, sim.seed);

  SubsetSchedule sched = make_default_schedule(net, sim.link_days);
  std::vector<LinkObservation> links = simulate_links(gt, sched);
  std::vector<std::string> warnings;
  std::vector<RouteObservation> routes;
  if (sim.generator == "model")
    routes = simulate_routes(gt, sim.route_days, &warnings);
  else if (sim.generator == "link-sum")
    routes = simulate_routes_linksum(gt, sim.route_days);
  else
    throw Error("unknown generator \"" + sim.generator +
                "\" (use \"model\" or \"link-sum\")");

  json truth;
  truth["theta_star"] = sim.theta_star;
  truth["seed"] = sim.seed;
  truth["generator"] = sim.generator;
  truth["link_days"] = sim.link_days;
  truth["route_days"] = sim.route_days;
  for (const auto& w : warnings) truth["warnings"].push_back(w);

  OutputBatch batch;
  batch.dir = cfg.out_dir;
  batch.add(sim.out_prefix + "_obs.csv", observations_to_csv(links, routes));
  batch.add(sim.out_prefix + "_schedule.json", save_schedule(sched));
  batch.add(sim.out_prefix + "_truth.json", truth.dump(2) + "\n");
  batch.commit();
}

void cmd_test_independence(const RunConfig& cfg) {
  NetworkModel net = load_net(cfg);
  ObservationSet obs = load_obs(cfg, net);
  if (cfg.schedule_path.empty())
    throw Error("test-independence needs a \"schedule\" path in the config");
  SubsetSchedule sched = parse_schedule(read_file(cfg.schedule_path), net);

  ComplianceReport comp = check_schedule(net, obs, sched);
  IndependenceReport rep = test_subset(obs, sched, cfg.indep_threshold,
                                       cfg.indep_grid_resolution);

  std::string summary = independence_summary(rep);
  summary += "\ncollection discipline: ";
  if (comp.compliant()) {
    summary += "no violations\n";
  } else {
    summary += std::to_string(comp.total_violations()) + " violations\n";
    for (const auto& v : comp.cross_subset)
      summary += "  cross-subset: " + v.detail + "\n";
    for (const auto& v : comp.adjacency)
      summary += "  adjacency: " + v.detail + "\n";
    for (const auto& v : comp.mixed_days)
      summary += "  mixed day: " + v.detail + "\n";
  }
  for (const auto& n : comp.notes) summary += "  note: " + n + "\n";
  if (!rep.skipped.empty()) {
    summary += "\nskipped pairs:\n";
    for (const auto& s : rep.skipped) summary += "  " + s + "\n";
  }

  OutputBatch batch;
  batch.dir = cfg.out_dir;
  batch.add("independence.csv", independence_to_csv(rep));
  batch.add("independence_summary.txt", summary);
  batch.commit();
}

} // namespace routelink
