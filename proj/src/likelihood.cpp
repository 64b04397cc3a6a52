#include "routelink/likelihood.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <string>

#include "routelink/bridge.hpp"
#include "routelink/errors.hpp"

namespace routelink {

ParamVector ParamVector::clamped(Eigen::VectorXd v) {
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (!std::isfinite(v[j]))
      throw Error("non-finite parameter at position " + std::to_string(j + 1));
    v[j] = std::min(1.0 - kClamp, std::max(kClamp, v[j]));
  }
  return ParamVector{std::move(v)};
}

bool ParamVector::at_boundary(int j) const {
  return rho[j] <= kClamp || rho[j] >= 1.0 - kClamp;
}

namespace {

void check_dims(const NetworkModel& net, const ObservationSet& obs,
                const ParamVector& theta) {
  const int p = static_cast<int>(net.links.size());
  if (theta.size() != p)
    throw Error("parameter vector has " + std::to_string(theta.size()) +
                " entries, network has " + std::to_string(p) + " links");
  if (static_cast<int>(obs.successes.size()) != p)
    throw Error("observation set built for a different network");
}

BridgeEval checked_eval(const NetworkModel& net, const Route& route,
                        const ParamVector& theta, long k) {
  BridgeEval ev = eval_route(net, route, theta.rho);
  if (k > 0 && ev.h2 < kMinRouteVariance)
    throw DegenerateLikelihood("route " + std::to_string(route.id) +
                               ": log-scale variance " + std::to_string(ev.h2) +
                               " below " + std::to_string(kMinRouteVariance));
  return ev;
}

} // namespace

double log_likelihood(const NetworkModel& net, const ObservationSet& obs,
                      const ParamVector& theta) {
  check_dims(net, obs, theta);

  double ll = 0.0;
  for (std::size_t qi = 0; qi < net.routes.size(); ++qi) {
    const auto& zq = obs.log_times[qi];
    const long k = static_cast<long>(zq.size());
    if (k == 0) continue;
    BridgeEval ev = checked_eval(net, net.routes[qi], theta, k);
    double ss = 0.0;
    for (double z : zq) {
      const double d = z - ev.h1;
      ss += d * d;
    }
    ll += -0.5 * static_cast<double>(k) * std::log(ev.h2) - ss / (2.0 * ev.h2);
  }

  for (int j = 0; j < theta.size(); ++j) {
    const long n = obs.trials[j];
    if (n == 0) continue;
    const long s = obs.successes[j];
    ll += static_cast<double>(s) * std::log(theta.rho[j]) +
          static_cast<double>(n - s) * std::log(1.0 - theta.rho[j]);
  }
  return ll;
}

Eigen::VectorXd score(const NetworkModel& net, const ObservationSet& obs,
                      const ParamVector& theta) {
  check_dims(net, obs, theta);
  const int p = theta.size();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(p);

  for (std::size_t qi = 0; qi < net.routes.size(); ++qi) {
    const auto& zq = obs.log_times[qi];
    const long k = static_cast<long>(zq.size());
    if (k == 0) continue;
    BridgeEval ev = checked_eval(net, net.routes[qi], theta, k);
    double sum_d = 0.0, sum_d2 = 0.0;
    for (double z : zq) {
      const double d = z - ev.h1;
      sum_d += d;
      sum_d2 += d * d;
    }
    const double a = -static_cast<double>(k) / (2.0 * ev.h2) +
                     sum_d2 / (2.0 * ev.h2 * ev.h2);
    const double b = sum_d / ev.h2;
    g += a * ev.grad_h2 + b * ev.grad_h1;
  }

  for (int j = 0; j < p; ++j) {
    const long n = obs.trials[j];
    if (n == 0) continue;
    const long s = obs.successes[j];
    g[j] += static_cast<double>(s) / theta.rho[j] -
            static_cast<double>(n - s) / (1.0 - theta.rho[j]);
  }
  return g;
}

FimMatrix fim(const NetworkModel& net, const ObservationSet& obs,
              const ParamVector& theta) {
  check_dims(net, obs, theta);
  const int p = theta.size();
  FimMatrix out;
  out.F = Eigen::MatrixXd::Zero(p, p);
  out.J_diag = Eigen::VectorXd::Zero(p);

  for (std::size_t qi = 0; qi < net.routes.size(); ++qi) {
    const long k = static_cast<long>(obs.log_times[qi].size());
    if (k == 0) continue;
    BridgeEval ev = checked_eval(net, net.routes[qi], theta, k);
    const double kk = static_cast<double>(k);
    out.F += (kk / (2.0 * ev.h2 * ev.h2)) * (ev.grad_h2 * ev.grad_h2.transpose());
    out.F += (kk / ev.h2) * (ev.grad_h1 * ev.grad_h1.transpose());
  }

  for (int j = 0; j < p; ++j) {
    const long n = obs.trials[j];
    if (n == 0) continue;
    out.J_diag[j] = static_cast<double>(n) /
                    (theta.rho[j] * (1.0 - theta.rho[j]));
    out.F(j, j) += out.J_diag[j];
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.F,
                                                    Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double lo = ev.minCoeff(), hi = ev.maxCoeff();
  out.condition_estimate =
      lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  return out;
}

} // namespace routelink
