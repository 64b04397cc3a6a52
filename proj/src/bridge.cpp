#include "routelink/bridge.hpp"

#include <cmath>

namespace routelink {

double expected_link_time(const Link& link, double rho,
                          const SpeedPair& speeds) {
  return link.length_m / speeds.v_failure_mps - rho * speeds.slope_s(link.length_m);
}

BridgeEval eval_route(const NetworkModel& net, const Route& route,
                      const Eigen::VectorXd& theta) {
  const int p = net.num_links();
  BridgeEval ev;
  ev.grad_M = Eigen::VectorXd::Zero(p);
  ev.grad_h1 = Eigen::VectorXd::Zero(p);
  ev.grad_h2 = Eigen::VectorXd::Zero(p);

  for (int id : route.link_ids) {
    const Link& l = net.link(id);
    const int j = id - 1;
    const double rho = theta[j];
    const double slope = net.speeds.slope_s(l.length_m);
    ev.M += expected_link_time(l, rho, net.speeds);
    ev.V += slope * slope * rho * (1.0 - rho);
    ev.grad_M[j] = -slope;
    // reuse grad_h2 as scratch for dV/drho until the second pass
    ev.grad_h2[j] = slope * slope * (1.0 - 2.0 * rho);
  }

  const double ratio = ev.V / (ev.M * ev.M);
  ev.h2 = std::log1p(ratio);
  ev.h1 = std::log(ev.M) - 0.5 * ev.h2;

  // chain rule: with R = V/M^2 + 1,
  //   dh2 = (dV*M - 2*dM*V) / (R*M^3),  dh1 = dM/M - dh2/2
  const double R = ratio + 1.0;
  for (int id : route.link_ids) {
    const int j = id - 1;
    const double dM = ev.grad_M[j];
    const double dV = ev.grad_h2[j];
    const double dh2 = (dV * ev.M - 2.0 * dM * ev.V) / (R * ev.M * ev.M * ev.M);
    ev.grad_h2[j] = dh2;
    ev.grad_h1[j] = dM / ev.M - 0.5 * dh2;
  }
  return ev;
}

BridgeEval eval_route(const NetworkModel& net, int route_id,
                      const Eigen::VectorXd& theta) {
  return eval_route(net, net.route(route_id), theta);
}

} // namespace routelink
