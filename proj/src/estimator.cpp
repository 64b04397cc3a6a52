#include "routelink/estimator.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "routelink/bridge.hpp"
#include "routelink/errors.hpp"
#include "routelink/rng.hpp"

namespace routelink {

namespace {

constexpr std::uint64_t kStartStream = 10;
constexpr std::uint64_t kSplitStream = 11;

// Box bound in logit space; maps to the clamp in probability space.
const double kLogitBound =
    std::log((1.0 - ParamVector::kClamp) / ParamVector::kClamp);

double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }

// At the box edge the clamp value is produced exactly; sigmoid(+-bound)
// rounds a few ulp off it, which would defeat the exact boundary tests in
// projected() and ParamVector::at_boundary.
Eigen::VectorXd to_rho(const Eigen::VectorXd& u) {
  Eigen::VectorXd r(u.size());
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    if (u[j] <= -kLogitBound) r[j] = ParamVector::kClamp;
    else if (u[j] >= kLogitBound) r[j] = 1.0 - ParamVector::kClamp;
    else
      r[j] = std::min(1.0 - ParamVector::kClamp,
                      std::max(ParamVector::kClamp, sigmoid(u[j])));
  }
  return r;
}

void clamp_box(Eigen::VectorXd& u) {
  for (Eigen::Index j = 0; j < u.size(); ++j)
    u[j] = std::min(kLogitBound, std::max(-kLogitBound, u[j]));
}

// Score with components pinned at the clamp and pushing outward zeroed;
// its norm is the stationarity measure for the box-constrained problem.
Eigen::VectorXd projected(const Eigen::VectorXd& g, const ParamVector& theta) {
  Eigen::VectorXd out = g;
  for (int j = 0; j < theta.size(); ++j) {
    if (theta.rho[j] >= 1.0 - ParamVector::kClamp && g[j] > 0.0) out[j] = 0.0;
    if (theta.rho[j] <= ParamVector::kClamp && g[j] < 0.0) out[j] = 0.0;
  }
  return out;
}

struct SolveOutcome {
  Eigen::VectorXd u;
  double loglik = -std::numeric_limits<double>::infinity();
  double proj_norm = std::numeric_limits<double>::infinity();
  bool converged = false;
};

// Fisher scoring in logit coordinates with a Levenberg fallback and a
// backtracking line search. Stops at ||projected score||_inf below
// stop_tol * max(1, |loglik|).
SolveOutcome solve_from(const NetworkModel& net, const ObservationSet& obs,
                        Eigen::VectorXd u, const SolverConfig& cfg,
                        double stop_tol) {
  const Eigen::Index p = u.size();
  clamp_box(u);

  SolveOutcome out;
  ParamVector theta = ParamVector::clamped(to_rho(u));
  double ll = log_likelihood(net, obs, theta);
  double lambda = 0.0;

  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    const Eigen::VectorXd g = score(net, obs, theta);
    const double pnorm = projected(g, theta).lpNorm<Eigen::Infinity>();
    if (pnorm < stop_tol * std::max(1.0, std::abs(ll))) {
      out.converged = true;
      break;
    }

    const Eigen::MatrixXd F = fim(net, obs, theta).F;
    Eigen::VectorXd d_rho(p);
    for (Eigen::Index j = 0; j < p; ++j)
      d_rho[j] = theta.rho[j] * (1.0 - theta.rho[j]);
    Eigen::VectorXd g_u = d_rho.cwiseProduct(g);
    Eigen::MatrixXd F_u = d_rho.asDiagonal() * F * d_rho.asDiagonal();

    // Coordinates pinned at the box with an outward gradient are dropped
    // from the Newton system (same rule as projected()); otherwise their
    // vanishing curvature dominates the direction with a step the box
    // clamp then erases, and the line search stalls.
    for (Eigen::Index j = 0; j < p; ++j) {
      const bool outward_hi =
          theta.rho[j] >= 1.0 - ParamVector::kClamp && g[j] > 0.0;
      const bool outward_lo =
          theta.rho[j] <= ParamVector::kClamp && g[j] < 0.0;
      if (outward_hi || outward_lo) {
        g_u[j] = 0.0;
        F_u.row(j).setZero();
        F_u.col(j).setZero();
        F_u(j, j) = 1.0;
      }
    }

    bool stepped = false;
    for (int esc = 0; esc < 40 && !stepped; ++esc) {
      Eigen::MatrixXd A = F_u;
      A.diagonal().array() += lambda;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
      Eigen::VectorXd dir;
      double slope = -1.0;
      if (ldlt.info() == Eigen::Success) {
        dir = ldlt.solve(g_u);
        slope = g_u.dot(dir);
      }
      if (!(slope > 0.0) || !dir.allFinite()) {
        lambda = std::max(1e-8, lambda * 10.0);
        continue;
      }
      double step = 1.0;
      for (int half = 0; half < 45; ++half, step *= 0.5) {
        Eigen::VectorXd u_try = u + step * dir;
        clamp_box(u_try);
        ParamVector theta_try = ParamVector::clamped(to_rho(u_try));
        double ll_try;
        try {
          ll_try = log_likelihood(net, obs, theta_try);
        } catch (const DegenerateLikelihood&) {
          continue;
        }
        if (ll_try >= ll + 1e-4 * step * slope ||
            (std::isfinite(ll_try) && ll_try > ll)) {
          u = std::move(u_try);
          theta = std::move(theta_try);
          ll = ll_try;
          stepped = true;
          lambda *= 0.1;
          if (lambda < 1e-12) lambda = 0.0;
          break;
        }
      }
      if (!stepped) lambda = std::max(1e-8, lambda * 10.0);
    }
    if (!stepped) break; // no ascent step found at any damping
  }

  const Eigen::VectorXd g = score(net, obs, theta);
  out.u = std::move(u);
  out.loglik = ll;
  out.proj_norm = projected(g, theta).lpNorm<Eigen::Infinity>();
  out.converged = out.proj_norm < stop_tol * std::max(1.0, std::abs(ll));
  return out;
}

void invert_fim(const FimMatrix& fm, Eigen::MatrixXd& inv, int& rank) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fm.F);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double cutoff = 1e-10 * std::max(0.0, ev.maxCoeff());
  Eigen::VectorXd inv_ev = Eigen::VectorXd::Zero(ev.size());
  rank = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] > cutoff && ev[i] > 0.0) {
      inv_ev[i] = 1.0 / ev[i];
      ++rank;
    }
  }
  inv = es.eigenvectors() * inv_ev.asDiagonal() *
        es.eigenvectors().transpose();
  inv = ((inv + inv.transpose()) * 0.5).eval();
}

} // namespace

FitResult fit(const NetworkModel& net, const ObservationSet& obs,
              const SolverConfig& config) {
  const int p = net.num_links();
  if (!obs.has_link_data() && !obs.has_route_data())
    throw Error("no observations to fit");
  if (config.starts < 1) throw Error("need at least one start");

  // Every parameter must be touched by some data.
  for (int j = 0; j < p; ++j) {
    if (obs.trials[j] >= 1) continue;
    bool on_observed_route = false;
    for (std::size_t qi = 0; qi < net.routes.size() && !on_observed_route;
         ++qi) {
      if (obs.k(static_cast<int>(qi)) == 0) continue;
      for (int lid : net.routes[qi].link_ids)
        if (lid == j + 1) {
          on_observed_route = true;
          break;
        }
    }
    if (!on_observed_route)
      throw Error("link " + std::to_string(j + 1) +
                  " has no link data and lies on no observed route");
  }

  Eigen::VectorXd u0(p);
  if (config.init.size() != 0) {
    if (config.init.size() != p)
      throw Error("init start has wrong length");
    const ParamVector start = ParamVector::clamped(config.init);
    for (int j = 0; j < p; ++j)
      u0[j] = std::log(start.rho[j] / (1.0 - start.rho[j]));
  } else {
    for (int j = 0; j < p; ++j) {
      const double mean = (static_cast<double>(obs.successes[j]) + 0.5) /
                          (static_cast<double>(obs.trials[j]) + 1.0);
      u0[j] = std::log(mean / (1.0 - mean));
    }
  }
  clamp_box(u0);

  // Polish well past the certificate so downstream closed-form comparisons
  // see the optimum to near machine precision.
  const double stop_tol = std::min(config.tol, 1e-11);

  SolveOutcome best;
  int best_start = -1;
  for (int s = 0; s < config.starts; ++s) {
    Eigen::VectorXd u = u0;
    if (s > 0) {
      std::mt19937_64 rng(
          derive_seed(config.seed, kStartStream, static_cast<std::uint64_t>(s)));
      std::normal_distribution<double> noise(0.0, config.perturb_sd);
      for (int j = 0; j < p; ++j) u[j] += noise(rng);
    }
    SolveOutcome got;
    try {
      got = solve_from(net, obs, std::move(u), config, stop_tol);
    } catch (const DegenerateLikelihood&) {
      continue; // start landed in a degenerate region
    }
    const double tie = 1e-9 * std::max(1.0, std::abs(best.loglik));
    const bool better =
        best_start < 0 || got.loglik > best.loglik + tie ||
        (got.loglik > best.loglik - tie && got.proj_norm < best.proj_norm);
    if (better) {
      best = std::move(got);
      best_start = s;
    }
  }
  if (best_start < 0)
    throw DegenerateLikelihood("every start hit a degenerate likelihood");

  FitResult res;
  res.theta_hat = ParamVector::clamped(to_rho(best.u));
  res.loglik = best.loglik;
  res.score_norm_inf = best.proj_norm;
  res.converged =
      best.proj_norm < config.tol * std::max(1.0, std::abs(best.loglik));
  res.starts_used = config.starts;
  res.fim = fim(net, obs, res.theta_hat);
  invert_fim(res.fim, res.fim_inverse, res.fim_rank);
  for (int j = 0; j < p; ++j)
    if (res.theta_hat.at_boundary(j)) res.boundary_links.push_back(j + 1);
  return res;
}

RouteUncertainty route_uncertainty(const NetworkModel& net, const Route& route,
                                   const FitResult& fit) {
  if (!fit.converged) throw Error("fit did not converge");
  net.validate_route(route);
  BridgeEval ev = eval_route(net, route, fit.theta_hat.rho);

  const Eigen::Index p = fit.theta_hat.rho.size();
  Eigen::MatrixXd H(p, 2);
  H.col(0) = ev.grad_h1;
  H.col(1) = ev.grad_h2;

  RouteUncertainty unc;
  unc.h1_hat = ev.h1;
  unc.h2_hat = ev.h2;
  Eigen::Matrix2d S = H.transpose() * fit.fim_inverse * H;
  S = ((S + S.transpose()) * 0.5).eval();
  S(0, 0) = std::max(0.0, S(0, 0));
  S(1, 1) = std::max(0.0, S(1, 1));
  unc.Sigma = S;
  if (S(1, 1) > 0.0)
    unc.sigma_11_2 = std::min(
        S(0, 0), std::max(0.0, S(0, 0) - S(0, 1) * S(0, 1) / S(1, 1)));
  else
    unc.sigma_11_2 = S(0, 0);
  return unc;
}

double mean_time_std(const NetworkModel& net, const Route& route,
                     const FitResult& fit) {
  if (!fit.converged) throw Error("fit did not converge");
  net.validate_route(route);
  BridgeEval ev = eval_route(net, route, fit.theta_hat.rho);
  const double var = ev.grad_M.dot(fit.fim_inverse * ev.grad_M);
  return std::sqrt(std::max(0.0, var));
}

ValidationReport validate_split(const NetworkModel& net,
                                const std::vector<RouteObservation>& route_obs,
                                const std::vector<LinkObservation>& link_obs,
                                int target_route_id, std::uint64_t seed,
                                const SolverConfig& solver) {
  if (!net.has_route(target_route_id))
    throw Error("unknown route id " + std::to_string(target_route_id));

  std::vector<RouteObservation> target, others;
  for (const auto& r : route_obs)
    (r.route_id == target_route_id ? target : others).push_back(r);
  const int n = static_cast<int>(target.size());
  if (n < 4)
    throw Error("route " + std::to_string(target_route_id) + " has " +
                std::to_string(n) + " observations, need at least 4 to split");

  std::vector<int> idx(target.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(derive_seed(seed, kSplitStream,
                                  static_cast<std::uint64_t>(target_route_id)));
  std::shuffle(idx.begin(), idx.end(), rng);

  const int n_train = (n + 1) / 2;
  std::vector<RouteObservation> train = others;
  std::vector<double> train_t, test_t;
  for (int i = 0; i < n; ++i) {
    const auto& rec = target[static_cast<std::size_t>(idx[i])];
    if (i < n_train) {
      train.push_back(rec);
      train_t.push_back(rec.travel_time_s);
    } else {
      test_t.push_back(rec.travel_time_s);
    }
  }

  ObservationSet obs = ObservationSet::from_records(net, link_obs, train);
  FitResult fr = fit(net, obs, solver);
  if (!fr.converged) throw Error("training fit did not converge");

  const Route& route = net.route(target_route_id);
  BridgeEval ev = eval_route(net, route, fr.theta_hat.rho);

  auto mean_se = [](const std::vector<double>& v, double& mean, double& se) {
    const double n_d = static_cast<double>(v.size());
    mean = std::accumulate(v.begin(), v.end(), 0.0) / n_d;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    se = std::sqrt(ss / (n_d - 1.0)) / std::sqrt(n_d);
  };

  ValidationReport rep;
  rep.route_id = target_route_id;
  rep.n_train = n_train;
  rep.n_test = n - n_train;
  rep.mle_mean_s = ev.M;
  rep.mle_std_s = mean_time_std(net, route, fr);
  mean_se(train_t, rep.train_mean_s, rep.train_se_s);
  mean_se(test_t, rep.test_mean_s, rep.test_se_s);
  const double gap = std::abs(rep.mle_mean_s - rep.test_mean_s);
  rep.within_1se = gap <= rep.test_se_s;
  rep.within_2se = gap <= 2.0 * rep.test_se_s;
  return rep;
}

} // namespace routelink
