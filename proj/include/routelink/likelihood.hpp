#ifndef ROUTELINK_LIKELIHOOD_HPP
#define ROUTELINK_LIKELIHOOD_HPP

#include <Eigen/Core>

#include "routelink/ingest.hpp"
#include "routelink/netmodel.hpp"

namespace routelink {

/// Link success probabilities, every component clamped to
/// [kClamp, 1 - kClamp]. The clamp keeps the Bernoulli terms and J(theta)
/// finite when a link's sample mean sits at 0 or 1.
struct ParamVector {
  static constexpr double kClamp = 1e-6;

  Eigen::VectorXd rho;

  static ParamVector clamped(Eigen::VectorXd v);
  int size() const { return static_cast<int>(rho.size()); }
  bool at_boundary(int j) const; // theta position j (0-based) at the clamp
};

/// Expected information in the data at theta. F is the route outer-product
/// sum plus the diagonal link block J = diag(n_j / (rho_j (1-rho_j))).
struct FimMatrix {
  Eigen::MatrixXd F;
  Eigen::VectorXd J_diag;
  double condition_estimate = 0.0; // lambda_max/lambda_min, inf if singular
};

/// Smallest admissible log-scale variance for a route that has data.
/// Anything below is treated as degenerate rather than floored.
constexpr double kMinRouteVariance = 1e-12;

/// Joint log-likelihood (additive constant omitted):
///   sum_q [ -k(q)/2 log h2_q - 1/(2 h2_q) sum_i (Z_qi - h1_q)^2 ]
/// + sum_j [ S_j log rho_j + (n_j - S_j) log(1 - rho_j) ].
double log_likelihood(const NetworkModel& net, const ObservationSet& obs,
                      const ParamVector& theta);

/// Gradient of log_likelihood with respect to theta.
Eigen::VectorXd score(const NetworkModel& net, const ObservationSet& obs,
                      const ParamVector& theta);

FimMatrix fim(const NetworkModel& net, const ObservationSet& obs,
              const ParamVector& theta);

} // namespace routelink

#endif
