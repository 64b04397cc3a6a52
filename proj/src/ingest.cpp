#include "routelink/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace routelink {

using nlohmann::json;

bool is_success(LinkState s) {
  return s == LinkState::green || s == LinkState::yellow;
}

LinkState parse_link_state(const std::string& token) {
  if (token == "green" || token == "1") return LinkState::green;
  if (token == "yellow") return LinkState::yellow;
  if (token == "red" || token == "0") return LinkState::red;
  if (token == "dark_red") return LinkState::dark_red;
  throw ParseError("unknown link state '" + token + "'");
}

std::string to_string(LinkState s) {
  switch (s) {
    case LinkState::green: return "green";
    case LinkState::yellow: return "yellow";
    case LinkState::red: return "red";
    case LinkState::dark_red: return "dark_red";
  }
  return "?";
}

bool ObservationSet::has_route_data() const {
  for (const auto& z : log_times)
    if (!z.empty()) return true;
  return false;
}

bool ObservationSet::has_link_data() const {
  for (long n : trials)
    if (n > 0) return true;
  return false;
}

ObservationSet ObservationSet::from_records(
    const NetworkModel& net, const std::vector<LinkObservation>& links,
    const std::vector<RouteObservation>& routes, bool strict) {
  ObservationSet obs;
  size_t p = static_cast<size_t>(net.num_links());
  obs.successes.assign(p, 0);
  obs.trials.assign(p, 0);
  obs.link_states.resize(p);
  obs.log_times.resize(static_cast<size_t>(net.num_routes()));

  for (const LinkObservation& rec : links) {
    if (rec.link_id < 1 || rec.link_id > net.num_links())
      throw ParseError("unknown link " + std::to_string(rec.link_id));
    size_t j = static_cast<size_t>(rec.link_id - 1);
    bool success = is_success(rec.state);
    if (!obs.link_states[j].emplace(rec.day, success).second)
      throw ParseError("duplicate observation for link " +
                       std::to_string(rec.link_id) + " on day " + rec.day);
    obs.link_days.insert(rec.day);
  }
  // counts after dedup check, per-day map is the source of truth
  for (size_t j = 0; j < p; ++j) {
    obs.trials[j] = static_cast<long>(obs.link_states[j].size());
    for (const auto& [day, success] : obs.link_states[j])
      if (success) ++obs.successes[j];
  }

  // sort route records by day within each route so that aggregation is
  // independent of input order, then check (route, day) uniqueness
  std::vector<std::vector<std::pair<std::string, double>>> per_route(
      static_cast<size_t>(net.num_routes()));
  for (const RouteObservation& rec : routes) {
    int pos = net.route_pos(rec.route_id);
    if (pos < 0) throw ParseError("unknown route " + std::to_string(rec.route_id));
    if (!(rec.travel_time_s > 0.0))
      throw ParseError("non-positive travel time for route " +
                       std::to_string(rec.route_id) + " on day " + rec.day);
    per_route[static_cast<size_t>(pos)].emplace_back(rec.day,
                                                     rec.travel_time_s);
    obs.route_days.insert(rec.day);
  }
  for (size_t q = 0; q < per_route.size(); ++q) {
    auto& v = per_route[q];
    std::sort(v.begin(), v.end());
    for (size_t i = 1; i < v.size(); ++i)
      if (v[i].first == v[i - 1].first)
        throw ParseError("duplicate observation for route " +
                         std::to_string(net.routes[q].id) + " on day " +
                         v[i].first);
    for (const auto& [day, t] : v) obs.log_times[q].push_back(std::log(t));
  }

  for (const std::string& day : obs.link_days) {
    if (obs.route_days.count(day)) {
      std::string msg = "day " + day + " carries both link and route records";
      if (strict) throw ParseError(msg);
      obs.warnings.push_back(msg);
    }
  }
  return obs;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim surrounding whitespace
    size_t b = field.find_first_not_of(" \t\r");
    size_t e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  return out;
}

} // namespace

void parse_observation_records(const std::string& csv_text,
                               std::vector<LinkObservation>& links,
                               std::vector<RouteObservation>& routes) {
  std::stringstream ss(csv_text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (lineno == 1 && line.rfind("kind", 0) == 0) continue; // header
    auto f = split_csv_line(line);
    if (f.size() != 4)
      throw ParseError("line " + std::to_string(lineno) +
                       ": expected 4 fields, got " + std::to_string(f.size()));
    int id;
    try {
      id = std::stoi(f[2]);
    } catch (...) {
      throw ParseError("line " + std::to_string(lineno) + ": bad entity id '" +
                       f[2] + "'");
    }
    if (f[0] == "link") {
      links.push_back({f[1], id, parse_link_state(f[3])});
    } else if (f[0] == "route") {
      double t;
      try {
        t = std::stod(f[3]);
      } catch (...) {
        throw ParseError("line " + std::to_string(lineno) +
                         ": bad travel time '" + f[3] + "'");
      }
      if (!(t > 0.0))
        throw ParseError("line " + std::to_string(lineno) +
                         ": non-positive travel time " + f[3]);
      routes.push_back({f[1], id, t});
    } else {
      throw ParseError("line " + std::to_string(lineno) + ": kind must be " +
                       "'link' or 'route', got '" + f[0] + "'");
    }
  }
}

ObservationSet parse_observations(const std::string& csv_text,
                                  const NetworkModel& net, bool strict) {
  std::vector<LinkObservation> links;
  std::vector<RouteObservation> routes;
  parse_observation_records(csv_text, links, routes);
  return ObservationSet::from_records(net, links, routes, strict);
}

std::string observations_to_csv(const std::vector<LinkObservation>& links,
                                const std::vector<RouteObservation>& routes) {
  std::string out = "kind,day,entity_id,value\n";
  char buf[64];
  for (const auto& r : links)
    out += "link," + r.day + "," + std::to_string(r.link_id) + "," +
           to_string(r.state) + "\n";
  for (const auto& r : routes) {
    std::snprintf(buf, sizeof buf, "%.6f", r.travel_time_s);
    out += "route," + r.day + "," + std::to_string(r.route_id) + "," + buf +
           "\n";
  }
  return out;
}

int SubsetSchedule::subset_of(int link_id) const {
  for (int id : subset1)
    if (id == link_id) return 1;
  for (int id : subset2)
    if (id == link_id) return 2;
  return 0;
}

SubsetSchedule parse_schedule(const std::string& text,
                              const NetworkModel& net) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("schedule file: ") + e.what());
  }
  SubsetSchedule s;
  std::set<int> seen;
  auto read_subset = [&](const char* key, std::vector<int>& dst) {
    for (const json& idj : j.at(key)) {
      int id = idj.get<int>();
      if (id < 1 || id > net.num_links())
        throw ParseError("schedule references unknown link " +
                         std::to_string(id));
      if (!seen.insert(id).second)
        throw ParseError("link " + std::to_string(id) +
                         " appears twice in the schedule");
      dst.push_back(id);
    }
  };
  read_subset("subset1", s.subset1);
  read_subset("subset2", s.subset2);
  if (static_cast<int>(seen.size()) != net.num_links())
    throw ParseError("schedule must partition all links: " +
                     std::to_string(seen.size()) + " of " +
                     std::to_string(net.num_links()) + " assigned");
  if (j.contains("days"))
    for (auto it = j["days"].begin(); it != j["days"].end(); ++it) {
      int sub = it.value().get<int>();
      if (sub != 1 && sub != 2)
        throw ParseError("day " + it.key() + ": subset must be 1 or 2");
      s.day_subset[it.key()] = sub;
    }
  return s;
}

std::string save_schedule(const SubsetSchedule& sched) {
  json j;
  j["subset1"] = sched.subset1;
  j["subset2"] = sched.subset2;
  j["days"] = json::object();
  for (const auto& [day, sub] : sched.day_subset) j["days"][day] = sub;
  return j.dump(2) + "\n";
}

ComplianceReport check_schedule(const NetworkModel& net,
                                const ObservationSet& obs,
                                const SubsetSchedule& sched) {
  ComplianceReport rep;

  // observed links must be covered by the schedule
  for (int j = 1; j <= net.num_links(); ++j)
    if (obs.trials[static_cast<size_t>(j - 1)] > 0 && sched.subset_of(j) == 0)
      rep.notes.push_back("link " + std::to_string(j) +
                          " has observations but no subset assignment");

  // link records on days assigned to the other subset
  for (int j = 1; j <= net.num_links(); ++j) {
    int sub = sched.subset_of(j);
    for (const auto& [day, st] : obs.link_states[static_cast<size_t>(j - 1)]) {
      (void)st;
      auto it = sched.day_subset.find(day);
      if (it == sched.day_subset.end()) {
        rep.notes.push_back("day " + day + " (link " + std::to_string(j) +
                            ") is not in the schedule");
      } else if (sub != 0 && it->second != sub) {
        rep.cross_subset.push_back({"link " + std::to_string(j) +
                                    " (subset " + std::to_string(sub) +
                                    ") logged on day " + day + " of subset " +
                                    std::to_string(it->second)});
      }
    }
  }

  // adjacent links inside one subset: sharing any node
  auto scan_adjacency = [&](const std::vector<int>& subset, int which) {
    for (size_t a = 0; a < subset.size(); ++a)
      for (size_t b = a + 1; b < subset.size(); ++b) {
        const Link& la = net.link(subset[a]);
        const Link& lb = net.link(subset[b]);
        bool share = la.from_node == lb.from_node ||
                     la.from_node == lb.to_node ||
                     la.to_node == lb.from_node || la.to_node == lb.to_node;
        if (share)
          rep.adjacency.push_back({"links " + std::to_string(la.id) + " and " +
                                   std::to_string(lb.id) +
                                   " share a node in subset " +
                                   std::to_string(which)});
      }
  };
  scan_adjacency(sched.subset1, 1);
  scan_adjacency(sched.subset2, 2);

  for (const std::string& day : obs.link_days)
    if (obs.route_days.count(day))
      rep.mixed_days.push_back(
          {"day " + day + " carries both link and route records"});

  return rep;
}

} // namespace routelink
