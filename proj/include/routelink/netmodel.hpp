#ifndef ROUTELINK_NETMODEL_HPP
#define ROUTELINK_NETMODEL_HPP

#include <string>
#include <unordered_map>
#include <vector>

#include "routelink/errors.hpp"

namespace routelink {

/// A directed road segment. Opposite directions of the same street are two
/// distinct links. `id` is the canonical id in 1..p after load.
struct Link {
  int id = 0;
  std::string from_node;
  std::string to_node;
  double length_m = 0.0;
};

/// Mean travel speeds for the two traffic states, meters/second.
/// Fixed inputs of the model, never estimated. Requires
/// v_success_mps > v_failure_mps > 0.
struct SpeedPair {
  double v_success_mps = 0.0; // non-congested
  double v_failure_mps = 0.0; // congested

  /// l*(v-v')/(v*v'): seconds of delay per unit success probability for a
  /// link of length l. Positive under the invariant.
  double slope_s(double length_m) const {
    return length_m * (v_success_mps - v_failure_mps) /
           (v_success_mps * v_failure_mps);
  }
};

/// An ordered, head-to-tail connected sequence of links. Repeated links are
/// rejected at load.
struct Route {
  int id = 0;
  std::vector<int> link_ids; // canonical ids, in path order
};

/// One link of a route together with its 1-based position in the parameter
/// vector theta (equal to the canonical link id).
struct RouteLinkRef {
  const Link* link = nullptr;
  int param_index = 0; // 1..p
};

/// Immutable after load; safe to share across threads.
class NetworkModel {
public:
  SpeedPair speeds;
  std::vector<Link> links;   // links[i].id == i+1 after canonicalization
  std::vector<Route> routes; // file order

  int num_links() const { return static_cast<int>(links.size()); }
  int num_routes() const { return static_cast<int>(routes.size()); }

  const Link& link(int canonical_id) const;
  const Route& route(int route_id) const;
  bool has_route(int route_id) const;
  /// Route position in `routes` (0-based), -1 if absent.
  int route_pos(int route_id) const;

  /// Link by endpoints, nullptr if no such link.
  const Link* find_link(const std::string& from, const std::string& to) const;

  /// Builds an ad-hoc route (id 0) from a node path, validating connectivity
  /// and rejecting repeated links. Throws ParseError on failure.
  Route route_from_nodes(const std::vector<std::string>& nodes) const;

  /// Validates an externally built route against this network (link ids
  /// resolve, consecutive links connect, no repeats).
  void validate_route(const Route& r) const;

private:
  friend NetworkModel load_network(const std::string& text);
  std::unordered_map<int, int> route_index_; // id -> position
  std::unordered_map<std::string, int> link_by_endpoints_; // "from->to" -> id
};

/// Parses and validates a network file (JSON, see docs/formats in README).
/// Link ids are canonicalized to 1..p preserving file order; route link
/// references are remapped accordingly.
NetworkModel load_network(const std::string& text);

/// Serializes in the canonical form accepted by load_network. Loading the
/// result reproduces the model exactly.
std::string save_network(const NetworkModel& net);

/// Ordered links of a route with their positions in theta.
std::vector<RouteLinkRef> route_links(const NetworkModel& net, int route_id);
std::vector<RouteLinkRef> route_links(const NetworkModel& net,
                                      const Route& route);

} // namespace routelink

#endif
