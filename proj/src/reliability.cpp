#include "routelink/reliability.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "routelink/errors.hpp"

namespace routelink {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double beta_of(const RouteUncertainty& unc) {
  return unc.Sigma(1, 1) > 0.0 ? unc.Sigma(0, 1) / unc.Sigma(1, 1) : 0.0;
}

void check_unc(const RouteUncertainty& unc) {
  if (!(unc.sigma_11_2 >= 0.0))
    throw Error("negative conditional variance in route uncertainty");
  if (!(unc.Sigma(1, 1) >= 0.0))
    throw Error("negative variance for the log-scale parameter");
}

} // namespace

double conditional_density(double z, double h2_sample,
                           const RouteUncertainty& unc) {
  check_unc(unc);
  if (!(h2_sample > 0.0))
    throw Error("conditional density needs a positive variance sample");
  const double h = unc.h1_hat + beta_of(unc) * (h2_sample - unc.h2_hat);
  const double v = unc.sigma_11_2 + h2_sample;
  const double d = z - h;
  return std::exp(-d * d / (2.0 * v)) / std::sqrt(kTwoPi * v);
}

std::pair<double, double> default_bounds(const RouteUncertainty& unc) {
  const double spread = 6.0 * std::sqrt(unc.h2_hat + unc.Sigma(0, 0));
  return {unc.h1_hat - spread, unc.h1_hat + spread};
}

TravelTimePmf generate_pmf(const RouteUncertainty& unc, const McConfig& cfg) {
  check_unc(unc);
  if (cfg.n_samples < 1) throw Error("n_samples must be >= 1");

  double a = cfg.a, b = cfg.b;
  if (!(a < b)) std::tie(a, b) = default_bounds(unc);
  if (!(a < b)) throw Error("degenerate grid bounds");
  if (!(cfg.step > 0.0) || cfg.step > (b - a) / 100.0)
    throw Error("step must be positive and at most (b-a)/100");

  const long N = cfg.n_samples;
  const double sd2 = std::sqrt(unc.Sigma(1, 1));
  std::vector<double> h2s;
  h2s.reserve(static_cast<std::size_t>(N));
  double rejection_rate = 0.0;
  if (sd2 == 0.0) {
    if (!(unc.h2_hat > 0.0))
      throw Error("route variance is zero; travel-time distribution "
                  "degenerates to a point");
    h2s.assign(static_cast<std::size_t>(N), unc.h2_hat);
  } else {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> draw(unc.h2_hat, sd2);
    long total = 0;
    const long max_total = 20 * N;
    while (static_cast<long>(h2s.size()) < N && total < max_total) {
      const double x = draw(rng);
      ++total;
      if (x > 0.0) h2s.push_back(x);
    }
    rejection_rate =
        static_cast<double>(total - static_cast<long>(h2s.size())) /
        static_cast<double>(total);
    if (static_cast<long>(h2s.size()) < N || rejection_rate > 0.05)
      throw Error("rejected " + std::to_string(rejection_rate * 100.0) +
                  "% of variance draws; the uncertainty estimate puts too "
                  "much weight on negative variances");
  }

  // Per-sample constants; the same draws serve every grid point.
  const double beta = beta_of(unc);
  std::vector<double> h(h2s.size()), inv2v(h2s.size()), norm(h2s.size());
  for (std::size_t i = 0; i < h2s.size(); ++i) {
    h[i] = unc.h1_hat + beta * (h2s[i] - unc.h2_hat);
    const double v = unc.sigma_11_2 + h2s[i];
    inv2v[i] = 1.0 / (2.0 * v);
    norm[i] = 1.0 / std::sqrt(kTwoPi * v);
  }

  const long K = static_cast<long>(std::floor((b - a) / cfg.step + 1e-9)) + 1;
  TravelTimePmf pmf;
  pmf.rejection_rate = rejection_rate;
  pmf.t_s.reserve(static_cast<std::size_t>(K));
  pmf.mass.reserve(static_cast<std::size_t>(K));
  for (long k = 0; k < K; ++k) {
    const double z = a + static_cast<double>(k) * cfg.step;
    double acc = 0.0;
    for (std::size_t i = 0; i < h2s.size(); ++i) {
      const double d = z - h[i];
      acc += norm[i] * std::exp(-d * d * inv2v[i]);
    }
    const double p = acc / static_cast<double>(N);
    pmf.t_s.push_back(std::exp(z));
    pmf.mass.push_back(p * cfg.step);
    pmf.total_mass += p * cfg.step;
  }

  if (!(pmf.total_mass >= 0.99 && pmf.total_mass <= 1.01))
    throw Error("grid captures mass " + std::to_string(pmf.total_mass) +
                "; widen the bounds or reduce the step");
  return pmf;
}

namespace {

double percentile(const TravelTimePmf& pmf, const std::vector<double>& w,
                  double x) {
  double cum = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double prev = cum;
    cum += w[k];
    if (cum >= x - 1e-12) {
      if (k == 0 || w[k] <= 0.0) return pmf.t_s[k];
      double f = (x - prev) / w[k];
      f = std::min(1.0, std::max(0.0, f));
      return pmf.t_s[k - 1] + f * (pmf.t_s[k] - pmf.t_s[k - 1]);
    }
  }
  return pmf.t_s.back();
}

} // namespace

ReliabilityReport measures(const TravelTimePmf& pmf) {
  if (pmf.t_s.empty() || pmf.t_s.size() != pmf.mass.size())
    throw Error("empty or inconsistent pmf");
  double total = 0.0;
  for (double m : pmf.mass) {
    if (!(m >= 0.0)) throw Error("negative mass in pmf");
    total += m;
  }
  if (!(total > 0.0)) throw Error("pmf has zero mass");

  std::vector<double> w(pmf.mass.size());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = pmf.mass[k] / total;

  ReliabilityReport rep;
  double e2 = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    rep.mean_s += w[k] * pmf.t_s[k];
    e2 += w[k] * pmf.t_s[k] * pmf.t_s[k];
  }
  rep.std_s = std::sqrt(std::max(0.0, e2 - rep.mean_s * rep.mean_s));
  rep.coeff_var = rep.std_s / rep.mean_s;
  rep.pct95_s = percentile(pmf, w, 0.95);
  rep.pct15_s = percentile(pmf, w, 0.15);
  rep.buffer_index = (rep.pct95_s - rep.mean_s) / rep.mean_s;
  rep.planning_index = rep.pct95_s / rep.pct15_s;
  return rep;
}

std::string pmf_to_csv(const TravelTimePmf& pmf, const McConfig& cfg) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "# n_samples=%ld step=%.6g a=%.12g b=%.12g seed=%llu\n",
                cfg.n_samples, cfg.step, cfg.a, cfg.b,
                static_cast<unsigned long long>(cfg.seed));
  out += buf;
  std::snprintf(buf, sizeof(buf), "# total_mass=%.12g rejection_rate=%.6g\n",
                pmf.total_mass, pmf.rejection_rate);
  out += buf;
  out += "t_seconds,mass\n";
  for (std::size_t k = 0; k < pmf.t_s.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g\n", pmf.t_s[k], pmf.mass[k]);
    out += buf;
  }
  return out;
}

} // namespace routelink
