#ifndef ROUTELINK_ESTIMATOR_HPP
#define ROUTELINK_ESTIMATOR_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "routelink/ingest.hpp"
#include "routelink/likelihood.hpp"
#include "routelink/netmodel.hpp"

namespace routelink {

struct SolverConfig {
  /// Convergence certificate: ||projected score||_inf < tol * max(1, |loglik|).
  /// Components pinned at the clamp with an outward gradient count as zero,
  /// matching the box constraint's stationarity condition.
  double tol = 1e-6;
  int max_iter = 200;
  int starts = 8;
  std::uint64_t seed = 0;
  double perturb_sd = 0.5; // logit-space sd of start perturbations
  /// When non-empty (length p), replaces the sample-mean start for start 0;
  /// perturbed starts scatter around it as usual.
  Eigen::VectorXd init;
};

struct FitResult {
  ParamVector theta_hat;
  double loglik = 0.0;
  double score_norm_inf = 0.0; // projected, see SolverConfig::tol
  FimMatrix fim;
  Eigen::MatrixXd fim_inverse; // pseudo-inverse when rank-deficient
  int fim_rank = 0;
  int starts_used = 0;
  bool converged = false;
  std::vector<int> boundary_links; // canonical ids at the clamp
};

/// Maximizes the joint log-likelihood over [eps, 1-eps]^p. Quasi-Newton
/// (Fisher scoring with a Levenberg fallback) in logit coordinates,
/// multi-start from the continuity-corrected sample means (S+0.5)/(n+1)
/// plus seeded perturbations; best log-likelihood wins, ties by lower
/// score norm then lower start index. Deterministic given config.
FitResult fit(const NetworkModel& net, const ObservationSet& obs,
              const SolverConfig& config = {});

/// Log-normal parameters of a route at theta_hat with their asymptotic
/// covariance by the delta method: Sigma = H^T F^{-1} H for the p-by-2
/// gradient matrix H = [grad h1, grad h2]. Works for routes without any
/// collected data. sigma_11_2 is the conditional variance of h1 given h2,
/// floored at 0.
struct RouteUncertainty {
  double h1_hat = 0.0;
  double h2_hat = 0.0;
  Eigen::Matrix2d Sigma;
  double sigma_11_2 = 0.0;
};

RouteUncertainty route_uncertainty(const NetworkModel& net, const Route& route,
                                   const FitResult& fit);

/// Delta-method standard deviation of the route's estimated mean travel
/// time M(theta_hat), seconds.
double mean_time_std(const NetworkModel& net, const Route& route,
                     const FitResult& fit);

/// Split-sample check of one route's fitted mean against held-out data.
/// The target route's observations are shuffled and halved; the first half
/// trains together with all link data and every other route's data, the
/// second half is held out. Standard errors are of the mean (s/sqrt(n)).
struct ValidationReport {
  int route_id = 0;
  int n_train = 0;
  int n_test = 0;
  double mle_mean_s = 0.0;
  double mle_std_s = 0.0;
  double train_mean_s = 0.0;
  double train_se_s = 0.0;
  double test_mean_s = 0.0;
  double test_se_s = 0.0;
  bool within_1se = false; // |mle_mean - test_mean| <= 1 test SE
  bool within_2se = false;
};

ValidationReport validate_split(const NetworkModel& net,
                                const std::vector<RouteObservation>& route_obs,
                                const std::vector<LinkObservation>& link_obs,
                                int target_route_id, std::uint64_t seed,
                                const SolverConfig& solver = {});

} // namespace routelink

#endif
