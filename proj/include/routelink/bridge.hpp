#ifndef ROUTELINK_BRIDGE_HPP
#define ROUTELINK_BRIDGE_HPP

#include <Eigen/Core>

#include "routelink/netmodel.hpp"

namespace routelink {

/// Moment sums and log-normal parameters of one route at a given theta,
/// with analytic gradients. Gradient entries are zero for links not on the
/// route; all vectors have length p.
///
/// M is the route's expected travel time (seconds), V its variance from
/// independent link states (seconds^2). The log-normal parameters follow by
/// moment matching:
///   h2 = log(V/M^2 + 1),   h1 = log M - h2/2.
struct BridgeEval {
  double M = 0.0;
  double V = 0.0;
  double h1 = 0.0;
  double h2 = 0.0;
  Eigen::VectorXd grad_M;  // dM/drho_j = -l_j (v-v')/(v v') on-route
  Eigen::VectorXd grad_h1;
  Eigen::VectorXd grad_h2;
};

/// Expected travel time of one link, seconds:
///   l/v' - l rho (v-v')/(v v')
/// which is l/v at rho=1 and l/v' at rho=0.
double expected_link_time(const Link& link, double rho,
                          const SpeedPair& speeds);

/// Evaluates M, V, h1, h2 and their gradients for a route at theta
/// (length p, entries in (0,1)). Pure and reentrant.
BridgeEval eval_route(const NetworkModel& net, const Route& route,
                      const Eigen::VectorXd& theta);
BridgeEval eval_route(const NetworkModel& net, int route_id,
                      const Eigen::VectorXd& theta);

} // namespace routelink

#endif
