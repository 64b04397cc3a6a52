#ifndef ROUTELINK_RELIABILITY_HPP
#define ROUTELINK_RELIABILITY_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "routelink/estimator.hpp"

namespace routelink {

/// Monte Carlo settings for the travel-time pmf. Bounds are in log-seconds;
/// a >= b requests the default bounds h1 -/+ 6 sqrt(h2 + sigma1^2), which
/// leave tail mass below tail_mass_target.
struct McConfig {
  long n_samples = 20000;
  double step = 0.002; // log-seconds grid increment
  double a = 0.0;
  double b = 0.0;
  std::uint64_t seed = 0;
  double tail_mass_target = 1e-4;
};

/// Discretized travel-time distribution: mass q_k = p(z_k) * step at
/// t_k = exp(z_k). Kept unnormalized; total_mass reports the discretization
/// quality and measures() renormalizes.
struct TravelTimePmf {
  std::vector<double> t_s;  // strictly increasing, seconds
  std::vector<double> mass; // all >= 0
  double total_mass = 0.0;
  double rejection_rate = 0.0; // fraction of non-positive variance draws
};

struct ReliabilityReport {
  double pct95_s = 0.0;
  double pct15_s = 0.0; // free-flow reference
  double mean_s = 0.0;
  double std_s = 0.0;
  double coeff_var = 0.0;
  double buffer_index = 0.0;   // (pct95 - mean) / mean
  double planning_index = 0.0; // pct95 / pct15
};

/// Density of the log travel time z given one variance draw h2_sample,
/// averaging over the estimation uncertainty of the location parameter:
/// normal with mean h = h1 + (sigma12/sigma2^2)(h2_sample - h2) and
/// variance sigma_11_2 + h2_sample.
double conditional_density(double z, double h2_sample,
                           const RouteUncertainty& unc);

std::pair<double, double> default_bounds(const RouteUncertainty& unc);

/// Builds the pmf: draws n_samples variance values from
/// N(h2, Sigma(2,2)) truncated to positives, then averages
/// conditional_density over them at every grid point (the same draws serve
/// the whole grid). Fails when the truncation rejects more than 5% of
/// draws or the grid captures less than 99% of the mass.
TravelTimePmf generate_pmf(const RouteUncertainty& unc, const McConfig& cfg);

/// The five reliability measures from the renormalized pmf. Percentiles
/// interpolate linearly in t between bracketing grid points.
ReliabilityReport measures(const TravelTimePmf& pmf);

/// Two-column CSV (t_seconds, mass) with the generating config echoed in
/// comment lines.
std::string pmf_to_csv(const TravelTimePmf& pmf, const McConfig& cfg);

} // namespace routelink

#endif
