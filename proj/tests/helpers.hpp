// Shared fixtures and independent oracles for the test suite. Networks are
// always built through load_network so the tests exercise the same
// construction path as production inputs.
#ifndef ROUTELINK_TESTS_HELPERS_HPP
#define ROUTELINK_TESTS_HELPERS_HPP

#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "routelink/ingest.hpp"
#include "routelink/netmodel.hpp"

namespace testutil {

inline std::string json_escape_int_list(const std::vector<int>& v) {
  std::string s = "[";
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s + "]";
}

/// JSON for a chain network: nodes N0..Np, link i runs N(i-1) -> N(i),
/// all lengths equal. Routes are given as lists of 1-based link ids and
/// must be contiguous ascending runs to stay head-to-tail connected.
inline std::string line_net_json(int p,
                                 const std::vector<std::vector<int>>& routes,
                                 double v = 10.0, double vp = 5.0,
                                 double length_m = 1000.0) {
  std::string s = "{\n  \"speeds\": {\"v_mps\": " + std::to_string(v) +
                  ", \"v_prime_mps\": " + std::to_string(vp) + "},\n";
  s += "  \"links\": [\n";
  for (int i = 1; i <= p; ++i) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "    {\"id\": %d, \"from\": \"N%d\", \"to\": \"N%d\", "
                  "\"length_m\": %.3f}%s\n",
                  i, i - 1, i, length_m, i == p ? "" : ",");
    s += buf;
  }
  s += "  ],\n  \"routes\": [\n";
  for (size_t r = 0; r < routes.size(); ++r) {
    s += "    {\"id\": " + std::to_string(r + 1) +
         ", \"link_ids\": " + json_escape_int_list(routes[r]) + "}" +
         (r + 1 == routes.size() ? "\n" : ",\n");
  }
  s += "  ]\n}\n";
  return s;
}

inline routelink::NetworkModel line_net(int p,
                                        const std::vector<std::vector<int>>& routes,
                                        double v = 10.0, double vp = 5.0,
                                        double length_m = 1000.0) {
  return routelink::load_network(line_net_json(p, routes, v, vp, length_m));
}

/// Single 1000 m link A -> B with v = 10, v' = 5 and route 1 over it.
inline routelink::NetworkModel one_link_net() {
  return line_net(1, {{1}});
}

/// A 4-by-4 grid (nodes A..P row-major) with both directions of every
/// street except two, giving 46 links, and 12 routes. Shaped like an urban
/// test network: p = 46, r = 12.
inline std::string grid46_json() {
  const char* grid[4] = {"ABCD", "EFGH", "IJKL", "MNOP"};
  std::vector<std::pair<std::string, std::string>> dirs;
  auto add_both = [&](char x, char y) {
    dirs.push_back({std::string(1, x), std::string(1, y)});
    dirs.push_back({std::string(1, y), std::string(1, x)});
  };
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c + 1 < 4; ++c) add_both(grid[r][c], grid[r][c + 1]);
  for (int r = 0; r + 1 < 4; ++r)
    for (int c = 0; c < 4; ++c) add_both(grid[r][c], grid[r + 1][c]);
  // Two one-way streets bring the count to 46.
  std::erase_if(dirs, [](const auto& d) {
    return (d.first == "A" && d.second == "E") ||
           (d.first == "E" && d.second == "I");
  });

  std::map<std::string, int> id_of;
  std::string s =
      "{\n  \"speeds\": {\"v_mps\": 10.0, \"v_prime_mps\": 5.0},\n  \"links\": [\n";
  for (size_t i = 0; i < dirs.size(); ++i) {
    id_of[dirs[i].first + ">" + dirs[i].second] = static_cast<int>(i + 1);
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "    {\"id\": %d, \"from\": \"%s\", \"to\": \"%s\", "
                  "\"length_m\": 800.0}%s\n",
                  static_cast<int>(i + 1), dirs[i].first.c_str(),
                  dirs[i].second.c_str(), i + 1 == dirs.size() ? "" : ",");
    s += buf;
  }
  s += "  ],\n  \"routes\": [\n";
  const std::vector<std::string> paths = {
      "MNJFB", "MIJFG", "ABCD", "DHLP", "PONM",  "IJKL",
      "EFGH",  "ABFJN", "DCGKO", "DCGKONM", "IEFB", "HGFE"};
  for (size_t r = 0; r < paths.size(); ++r) {
    std::vector<int> ids;
    for (size_t i = 0; i + 1 < paths[r].size(); ++i) {
      std::string key = std::string(1, paths[r][i]) + ">" +
                        std::string(1, paths[r][i + 1]);
      ids.push_back(id_of.at(key));
    }
    s += "    {\"id\": " + std::to_string(r + 1) +
         ", \"link_ids\": " + json_escape_int_list(ids) + "}" +
         (r + 1 == paths.size() ? "\n" : ",\n");
  }
  s += "  ]\n}\n";
  return s;
}

inline routelink::NetworkModel grid46_net() {
  return routelink::load_network(grid46_json());
}

/// Central finite difference, the reference for every analytic gradient.
inline Eigen::VectorXd fd_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (int j = 0; j < x.size(); ++j) {
    Eigen::VectorXd a = x, b = x;
    a[j] += h;
    b[j] -= h;
    g[j] = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

/// Term-by-term log-likelihood straight from the raw records, sharing no
/// code with the production evaluator: per-route moments are re-derived
/// from the link list and every record contributes its own term.
inline double naive_loglik(const routelink::NetworkModel& net,
                           const std::vector<routelink::LinkObservation>& links,
                           const std::vector<routelink::RouteObservation>& routes,
                           const Eigen::VectorXd& theta) {
  const double v = net.speeds.v_success_mps;
  const double vp = net.speeds.v_failure_mps;
  double ll = 0.0;
  for (const auto& rec : routes) {
    const routelink::Route& rt = net.route(rec.route_id);
    double M = 0.0, V = 0.0;
    for (int id : rt.link_ids) {
      const routelink::Link& lk = net.link(id);
      const double rho = theta[id - 1];
      const double slope = lk.length_m * (v - vp) / (v * vp);
      M += lk.length_m / vp - rho * slope;
      V += slope * slope * rho * (1.0 - rho);
    }
    const double s2 = std::log(V / (M * M) + 1.0);
    const double m = std::log(M) - s2 / 2.0;
    const double z = std::log(rec.travel_time_s);
    ll += -0.5 * std::log(s2) - std::pow(z - m, 2) / (2.0 * s2);
  }
  for (const auto& rec : links) {
    const double rho = theta[rec.link_id - 1];
    ll += routelink::is_success(rec.state) ? std::log(rho)
                                           : std::log(1.0 - rho);
  }
  return ll;
}

/// Day keys mirroring the generator's ("L000001", "R000001", ..).
inline std::string link_day(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "L%06d", i);
  return buf;
}
inline std::string route_day(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "R%06d", i);
  return buf;
}

/// n_j trials per link with the given success counts, one day per trial.
inline std::vector<routelink::LinkObservation>
link_records(const std::vector<long>& successes, const std::vector<long>& trials) {
  std::vector<routelink::LinkObservation> out;
  int day = 0;
  for (size_t j = 0; j < trials.size(); ++j)
    for (long i = 0; i < trials[j]; ++i)
      out.push_back({link_day(++day), static_cast<int>(j + 1),
                     i < successes[j] ? routelink::LinkState::green
                                      : routelink::LinkState::red});
  return out;
}

} // namespace testutil

#endif
