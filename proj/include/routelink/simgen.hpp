#ifndef ROUTELINK_SIMGEN_HPP
#define ROUTELINK_SIMGEN_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "routelink/ingest.hpp"
#include "routelink/netmodel.hpp"

namespace routelink {

/// Generating parameters for synthetic data. theta_star lies in [0,1]^p
/// (boundary values give deterministic links); the network outlives the
/// GroundTruth.
struct GroundTruth {
  const NetworkModel* net = nullptr;
  Eigen::VectorXd theta_star;
  std::uint64_t seed = 0;
};

GroundTruth make_ground_truth(const NetworkModel& net,
                              Eigen::VectorXd theta_star, std::uint64_t seed);

/// Bernoulli link states for every link on each of n_days days
/// (days "L000001".., no subset discipline). Each link draws from its own
/// seed stream, so the output for link j does not depend on p or on any
/// route simulation under the same master seed.
std::vector<LinkObservation> simulate_links(const GroundTruth& gt, int n_days);

/// Bernoulli link states following a collection schedule: on each scheduled
/// day exactly the links of the day's subset are observed. Day keys come
/// from the schedule. Output passes check_schedule with no cross-subset or
/// mixing violations by construction.
std::vector<LinkObservation> simulate_links(const GroundTruth& gt,
                                            const SubsetSchedule& sched);

/// Route travel times drawn from the model's own assumption:
/// Z ~ N(h1(theta*), h2(theta*)), T = exp(Z), independent across days and
/// routes (days "R000001"..). A route with h2 = 0 emits constant times
/// T = exp(h1) and a warning if `warnings` is given.
std::vector<RouteObservation>
simulate_routes(const GroundTruth& gt, int k_days,
                std::vector<std::string>* warnings = nullptr);

/// Misspecification variant: travel times as sums of per-link two-point
/// times (l/v on success, l/v' on failure) from independent Bernoulli
/// states. Matches simulate_routes in mean and variance but is not
/// log-normal; for robustness experiments.
std::vector<RouteObservation> simulate_routes_linksum(const GroundTruth& gt,
                                                      int k_days);

/// Splits the links into two subsets, greedily avoiding node-sharing pairs
/// inside a subset where the topology allows, and assigns n_days link days
/// ("L000001"..) to the subsets alternately. Dense networks may not admit an
/// adjacency-free partition; check_schedule reports what remains.
SubsetSchedule make_default_schedule(const NetworkModel& net, int n_days);

} // namespace routelink

#endif
