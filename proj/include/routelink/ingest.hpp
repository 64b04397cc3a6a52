#ifndef ROUTELINK_INGEST_HPP
#define ROUTELINK_INGEST_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

#include "routelink/netmodel.hpp"

namespace routelink {

/// Traffic-condition categories as logged. Binary inputs map 1 -> green,
/// 0 -> red. Success at aggregation time means green or yellow.
enum class LinkState { green, yellow, red, dark_red };

bool is_success(LinkState s);
LinkState parse_link_state(const std::string& token); // throws ParseError
std::string to_string(LinkState s);

/// One link reading on one day. Days are opaque strings; the sampling
/// discipline (same clock time every day) is the collector's responsibility.
struct LinkObservation {
  std::string day;
  int link_id = 0; // canonical id
  LinkState state = LinkState::green;
};

/// One route travel-time reading on one day, in seconds.
struct RouteObservation {
  std::string day;
  int route_id = 0;
  double travel_time_s = 0.0;
};

/// Aggregated sufficient statistics plus the per-day link states needed by
/// the independence diagnostics. Indexing follows the network: link j is
/// theta position j-1, routes follow the network's route order.
struct ObservationSet {
  std::vector<long> successes; // S_j, size p
  std::vector<long> trials;    // n_j, size p
  /// log travel times per route position, sorted by day (deterministic
  /// regardless of input record order)
  std::vector<std::vector<double>> log_times;
  /// per link: day -> success, only days with a record
  std::vector<std::map<std::string, bool>> link_states;
  std::set<std::string> link_days;
  std::set<std::string> route_days;
  std::vector<std::string> warnings;

  long k(int route_pos) const {
    return static_cast<long>(log_times[static_cast<size_t>(route_pos)].size());
  }
  bool has_route_data() const;
  bool has_link_data() const;

  /// Aggregates raw records. Duplicate (entity, day) pairs are a hard error;
  /// a day carrying both link and route records is an error when `strict`,
  /// otherwise recorded in `warnings`.
  static ObservationSet from_records(const NetworkModel& net,
                                     const std::vector<LinkObservation>& links,
                                     const std::vector<RouteObservation>& routes,
                                     bool strict = true);
};

/// Parses the observation CSV (`kind,day,entity_id,value`; see README) and
/// aggregates. Blank lines, '#' comments and one header line are skipped.
ObservationSet parse_observations(const std::string& csv_text,
                                  const NetworkModel& net, bool strict = true);

/// Raw records back out of CSV text, for generators and round-trip tools.
std::string observations_to_csv(const std::vector<LinkObservation>& links,
                                const std::vector<RouteObservation>& routes);
void parse_observation_records(const std::string& csv_text,
                               std::vector<LinkObservation>& links,
                               std::vector<RouteObservation>& routes);

/// Two-subset collection plan: a partition of the links plus a day -> subset
/// assignment. Parsed from JSON (see README).
struct SubsetSchedule {
  std::vector<int> subset1, subset2;          // canonical link ids
  std::map<std::string, int> day_subset;      // day -> 1 or 2

  int subset_of(int link_id) const; // 1, 2, or 0 if unassigned
};

SubsetSchedule parse_schedule(const std::string& text,
                              const NetworkModel& net);
std::string save_schedule(const SubsetSchedule& sched);

/// Outcome of checking observations against the collection discipline.
/// Report-only: building it never throws.
struct ComplianceReport {
  struct Violation {
    std::string detail;
  };
  std::vector<Violation> cross_subset;   // link logged on a day assigned to the other subset
  std::vector<Violation> adjacency;      // two links sharing a node in one subset
  std::vector<Violation> mixed_days;     // day with both link and route records
  std::vector<std::string> notes;        // non-violation observations (uncovered links, unscheduled days)

  bool compliant() const {
    return cross_subset.empty() && adjacency.empty() && mixed_days.empty();
  }
  size_t total_violations() const {
    return cross_subset.size() + adjacency.size() + mixed_days.size();
  }
};

/// Checks the two-subset discipline. The network supplies link endpoints for
/// the adjacency rule (two links are adjacent when they share a node).
ComplianceReport check_schedule(const NetworkModel& net,
                                const ObservationSet& obs,
                                const SubsetSchedule& sched);

} // namespace routelink

#endif
