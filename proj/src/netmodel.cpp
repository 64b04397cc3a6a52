#include "routelink/netmodel.hpp"

#include <set>
#include <sstream>

#include <json.hpp>

namespace routelink {

using nlohmann::json;

const Link& NetworkModel::link(int canonical_id) const {
  if (canonical_id < 1 || canonical_id > num_links())
    throw Error("unknown link " + std::to_string(canonical_id));
  return links[static_cast<size_t>(canonical_id - 1)];
}

int NetworkModel::route_pos(int route_id) const {
  auto it = route_index_.find(route_id);
  return it == route_index_.end() ? -1 : it->second;
}

bool NetworkModel::has_route(int route_id) const {
  return route_index_.count(route_id) > 0;
}

const Route& NetworkModel::route(int route_id) const {
  int pos = route_pos(route_id);
  if (pos < 0) throw Error("unknown route " + std::to_string(route_id));
  return routes[static_cast<size_t>(pos)];
}

const Link* NetworkModel::find_link(const std::string& from,
                                    const std::string& to) const {
  auto it = link_by_endpoints_.find(from + "->" + to);
  if (it == link_by_endpoints_.end()) return nullptr;
  return &links[static_cast<size_t>(it->second - 1)];
}

void NetworkModel::validate_route(const Route& r) const {
  if (r.link_ids.empty()) throw ParseError("route has no links");
  std::set<int> seen;
  const Link* prev = nullptr;
  for (int id : r.link_ids) {
    if (id < 1 || id > num_links())
      throw ParseError("route " + std::to_string(r.id) +
                       " references unknown link " + std::to_string(id));
    if (!seen.insert(id).second)
      throw ParseError("route " + std::to_string(r.id) + " repeats link " +
                       std::to_string(id));
    const Link& l = link(id);
    if (prev && prev->to_node != l.from_node)
      throw ParseError("route " + std::to_string(r.id) + ": link " +
                       std::to_string(prev->id) + " ends at '" +
                       prev->to_node + "' but link " + std::to_string(id) +
                       " starts at '" + l.from_node + "'");
    prev = &l;
  }
}

Route NetworkModel::route_from_nodes(
    const std::vector<std::string>& nodes) const {
  if (nodes.size() < 2) throw ParseError("node path needs at least two nodes");
  Route r;
  r.id = 0;
  for (size_t i = 0; i + 1 < nodes.size(); ++i) {
    const Link* l = find_link(nodes[i], nodes[i + 1]);
    if (!l)
      throw ParseError("no link from '" + nodes[i] + "' to '" + nodes[i + 1] +
                       "'");
    r.link_ids.push_back(l->id);
  }
  validate_route(r);
  return r;
}

namespace {

double require_positive(const json& j, const char* what) {
  if (!j.is_number())
    throw ParseError(std::string(what) + " must be a number");
  double v = j.get<double>();
  if (!(v > 0.0)) throw ParseError(std::string(what) + " must be positive");
  return v;
}

void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const char* what) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key()))
      throw ParseError(std::string("unexpected field '") + it.key() +
                       "' in " + what);
  }
}

} // namespace

NetworkModel load_network(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("network file: ") + e.what());
  }
  if (!j.is_object() || !j.contains("speeds") || !j.contains("links") ||
      !j.contains("routes"))
    throw ParseError("network file needs 'speeds', 'links' and 'routes'");

  NetworkModel net;

  const json& sp = j["speeds"];
  require_keys(sp, {"v_mps", "v_prime_mps"}, "speeds");
  net.speeds.v_success_mps = require_positive(sp.at("v_mps"), "v_mps");
  net.speeds.v_failure_mps =
      require_positive(sp.at("v_prime_mps"), "v_prime_mps");
  if (!(net.speeds.v_success_mps > net.speeds.v_failure_mps))
    throw ParseError("v_mps must exceed v_prime_mps");

  // Links: canonicalize ids to 1..p preserving file order. Per-link speed
  // fields are rejected (one global speed pair per network).
  std::unordered_map<int, int> id_map; // file id -> canonical id
  for (const json& lj : j["links"]) {
    require_keys(lj, {"id", "from", "to", "length_m"}, "link");
    Link l;
    int file_id = lj.at("id").get<int>();
    if (id_map.count(file_id))
      throw ParseError("duplicate link id " + std::to_string(file_id));
    l.from_node = lj.at("from").get<std::string>();
    l.to_node = lj.at("to").get<std::string>();
    if (l.from_node.empty() || l.to_node.empty() || l.from_node == l.to_node)
      throw ParseError("link " + std::to_string(file_id) +
                       " needs two distinct named endpoints");
    l.length_m = require_positive(lj.at("length_m"), "length_m");
    l.id = static_cast<int>(net.links.size()) + 1;
    id_map[file_id] = l.id;
    std::string key = l.from_node + "->" + l.to_node;
    if (net.link_by_endpoints_.count(key))
      throw ParseError("duplicate link direction " + key);
    net.link_by_endpoints_[key] = l.id;
    net.links.push_back(std::move(l));
  }
  if (net.links.empty()) throw ParseError("network has no links");

  for (const json& rj : j["routes"]) {
    require_keys(rj, {"id", "link_ids"}, "route");
    Route r;
    r.id = rj.at("id").get<int>();
    if (net.route_index_.count(r.id))
      throw ParseError("duplicate route id " + std::to_string(r.id));
    for (const json& idj : rj.at("link_ids")) {
      int file_id = idj.get<int>();
      auto it = id_map.find(file_id);
      if (it == id_map.end())
        throw ParseError("route " + std::to_string(r.id) +
                         " references unknown link " + std::to_string(file_id));
      r.link_ids.push_back(it->second);
    }
    net.validate_route(r);
    net.route_index_[r.id] = static_cast<int>(net.routes.size());
    net.routes.push_back(std::move(r));
  }
  return net;
}

std::string save_network(const NetworkModel& net) {
  json j;
  j["speeds"] = {{"v_mps", net.speeds.v_success_mps},
                 {"v_prime_mps", net.speeds.v_failure_mps}};
  j["links"] = json::array();
  for (const Link& l : net.links)
    j["links"].push_back({{"id", l.id},
                          {"from", l.from_node},
                          {"to", l.to_node},
                          {"length_m", l.length_m}});
  j["routes"] = json::array();
  for (const Route& r : net.routes)
    j["routes"].push_back({{"id", r.id}, {"link_ids", r.link_ids}});
  return j.dump(2) + "\n";
}

std::vector<RouteLinkRef> route_links(const NetworkModel& net,
                                      const Route& route) {
  std::vector<RouteLinkRef> out;
  out.reserve(route.link_ids.size());
  for (int id : route.link_ids) out.push_back({&net.link(id), id});
  return out;
}

std::vector<RouteLinkRef> route_links(const NetworkModel& net, int route_id) {
  return route_links(net, net.route(route_id));
}

} // namespace routelink
