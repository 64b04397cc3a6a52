#include <doctest.h>

#include <cmath>
#include <utility>
#include <vector>

#include "helpers.hpp"
#include "routelink/bridge.hpp"
#include "routelink/errors.hpp"
#include "routelink/estimator.hpp"
#include "routelink/reliability.hpp"

using namespace routelink;

namespace {

constexpr double kPi = 3.14159265358979323846;

double normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return std::exp(-d * d / (2.0 * var)) / std::sqrt(2.0 * kPi * var);
}

RouteUncertainty make_unc(double h1, double h2, double s11, double s12,
                          double s22) {
  RouteUncertainty u;
  u.h1_hat = h1;
  u.h2_hat = h2;
  u.Sigma << s11, s12, s12, s22;
  u.sigma_11_2 = s22 > 0.0 ? std::max(0.0, s11 - s12 * s12 / s22) : s11;
  return u;
}

} // namespace

TEST_CASE("conditional density is the h1-convolution of the model density") {
  // Independent check: integrate N(z; h1, h2s) against the conditional law
  // of h1 given the variance draw, by brute-force quadrature.
  RouteUncertainty unc = make_unc(4.73, 0.105, 1.2e-3, 2.5e-4, 1.0e-4);
  const double beta = unc.Sigma(0, 1) / unc.Sigma(1, 1);
  for (double h2s : {0.08, 0.105, 0.13}) {
    for (double z : {4.4, 4.7, 4.73, 5.0}) {
      const double center = unc.h1_hat + beta * (h2s - unc.h2_hat);
      const double sd1 = std::sqrt(unc.sigma_11_2);
      double acc = 0.0;
      const int n = 4001;
      const double lo = center - 10.0 * sd1, hi = center + 10.0 * sd1;
      const double dh = (hi - lo) / (n - 1);
      for (int i = 0; i < n; ++i) {
        const double h1 = lo + i * dh;
        const double wgt = (i == 0 || i == n - 1) ? 0.5 : 1.0;
        acc += wgt * normal_pdf(z, h1, h2s) *
               normal_pdf(h1, center, unc.sigma_11_2);
      }
      acc *= dh;
      CHECK(conditional_density(z, h2s, unc) ==
            doctest::Approx(acc).epsilon(1e-6));
    }
  }
}

TEST_CASE("no estimation uncertainty collapses to the plain model density") {
  RouteUncertainty unc = make_unc(4.73, 0.105, 0.0, 0.0, 0.0);
  for (double z : {4.0, 4.73, 5.3})
    CHECK(conditional_density(z, 0.105, unc) ==
          doctest::Approx(normal_pdf(z, 4.73, 0.105)).epsilon(1e-12));
  CHECK_THROWS_AS(conditional_density(4.7, 0.0, unc), Error);
  CHECK_THROWS_AS(conditional_density(4.7, -0.1, unc), Error);
}

TEST_CASE("uncorrelated uncertainty marginal matches a 2-D quadrature") {
  // Fixed inputs; the marginal density of z integrates over both the
  // location and the variance parameter.
  RouteUncertainty unc = make_unc(4.73, 0.105, 1.0e-3, 0.0, 1.0e-4);
  const double z = 4.7;
  const double sd2 = std::sqrt(unc.Sigma(1, 1));

  // One-level form: average the conditional density over the h2 law.
  double lhs = 0.0, wsum = 0.0;
  {
    const int n = 8001;
    const double lo = unc.h2_hat - 8.0 * sd2, hi = unc.h2_hat + 8.0 * sd2;
    const double dh = (hi - lo) / (n - 1);
    for (int i = 0; i < n; ++i) {
      const double h2 = lo + i * dh;
      if (h2 <= 0.0) continue;
      const double w = normal_pdf(h2, unc.h2_hat, unc.Sigma(1, 1)) * dh;
      lhs += w * conditional_density(z, h2, unc);
      wsum += w;
    }
    lhs /= wsum; // renormalize the (negligible) positive truncation
  }

  // Two-level form: raw double integral over (h1, h2).
  double rhs = 0.0, vol = 0.0;
  {
    const int n1 = 801, n2 = 801;
    const double sd1 = std::sqrt(unc.Sigma(0, 0));
    const double lo1 = unc.h1_hat - 8.0 * sd1, hi1 = unc.h1_hat + 8.0 * sd1;
    const double lo2 = unc.h2_hat - 8.0 * sd2, hi2 = unc.h2_hat + 8.0 * sd2;
    const double d1 = (hi1 - lo1) / (n1 - 1), d2 = (hi2 - lo2) / (n2 - 1);
    for (int i = 0; i < n1; ++i) {
      const double h1 = lo1 + i * d1;
      const double w1 = normal_pdf(h1, unc.h1_hat, unc.Sigma(0, 0));
      for (int j = 0; j < n2; ++j) {
        const double h2 = lo2 + j * d2;
        if (h2 <= 0.0) continue;
        const double w = w1 * normal_pdf(h2, unc.h2_hat, unc.Sigma(1, 1));
        rhs += w * normal_pdf(z, h1, h2) * d1 * d2;
        vol += w * d1 * d2;
      }
    }
    rhs /= vol;
  }
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-3));
}

TEST_CASE("zero-uncertainty pmf equals the fitted log-normal exactly") {
  // Single link at rho = 0.8.
  const double h2 = std::log(1600.0 / 14400.0 + 1.0);
  const double h1 = std::log(120.0) - h2 / 2.0;
  RouteUncertainty unc = make_unc(h1, h2, 0.0, 0.0, 0.0);
  McConfig cfg;
  cfg.n_samples = 50;
  TravelTimePmf pmf = generate_pmf(unc, cfg);
  CHECK(std::abs(pmf.total_mass - 1.0) < 1e-4);
  CHECK(pmf.rejection_rate == 0.0);
  for (std::size_t k = 0; k < pmf.t_s.size(); k += 37) {
    const double z = std::log(pmf.t_s[k]);
    const double expect = normal_pdf(z, h1, h2) * cfg.step;
    CHECK(pmf.mass[k] == doctest::Approx(expect).epsilon(1e-6).scale(1e-12));
  }
  SUBCASE("measures approach the closed forms") {
    ReliabilityReport rep = measures(pmf);
    CHECK(rep.pct95_s ==
          doctest::Approx(std::exp(h1 + 1.6449 * std::sqrt(h2))).epsilon(0.01));
    CHECK(rep.mean_s == doctest::Approx(std::exp(h1 + h2 / 2.0)).epsilon(0.01));
    CHECK(rep.pct15_s ==
          doctest::Approx(std::exp(h1 - 1.0364 * std::sqrt(h2))).epsilon(0.01));
    CHECK(rep.pct15_s < rep.pct95_s);
    CHECK(rep.buffer_index > 0.0);
    CHECK(rep.planning_index > 1.0);
  }
}

TEST_CASE("location-only uncertainty still uses the fixed variance") {
  const double h1 = 4.73, h2 = 0.105;
  RouteUncertainty unc = make_unc(h1, h2, 2.0e-3, 0.0, 0.0);
  McConfig cfg;
  cfg.n_samples = 10;
  TravelTimePmf pmf = generate_pmf(unc, cfg);
  for (std::size_t k = 100; k < pmf.t_s.size(); k += 211) {
    const double z = std::log(pmf.t_s[k]);
    const double expect = normal_pdf(z, h1, h2 + 2.0e-3) * cfg.step;
    CHECK(pmf.mass[k] == doctest::Approx(expect).epsilon(1e-6).scale(1e-12));
  }
}

TEST_CASE("pmf generation validates its inputs") {
  RouteUncertainty ok = make_unc(4.73, 0.105, 1e-3, 0.0, 1e-4);
  McConfig cfg;
  SUBCASE("n_samples") {
    cfg.n_samples = 0;
    CHECK_THROWS_AS(generate_pmf(ok, cfg), Error);
  }
  SUBCASE("step too coarse for explicit bounds") {
    cfg.a = 4.6;
    cfg.b = 4.8;
    cfg.step = 0.01; // more than (b-a)/100
    CHECK_THROWS_AS(generate_pmf(ok, cfg), Error);
  }
  SUBCASE("narrow bounds capture too little mass") {
    cfg.a = 4.73 - 0.15;
    cfg.b = 4.73 + 0.15;
    cfg.step = 0.002;
    CHECK_THROWS_AS(generate_pmf(ok, cfg), Error);
  }
  SUBCASE("too much weight on negative variances") {
    RouteUncertainty bad = make_unc(4.73, 1e-3, 1e-3, 0.0, 1e-4);
    CHECK_THROWS_AS(generate_pmf(bad, cfg), Error);
  }
  SUBCASE("zero variance point distribution") {
    RouteUncertainty point = make_unc(4.73, 0.0, 0.0, 0.0, 0.0);
    CHECK_THROWS_AS(generate_pmf(point, cfg), Error);
  }
}

TEST_CASE("pmf is deterministic given the seed and grid shaped") {
  RouteUncertainty unc = make_unc(4.73, 0.105, 1e-3, 1e-4, 1e-4);
  McConfig cfg;
  cfg.n_samples = 2000;
  cfg.seed = 31;
  TravelTimePmf a = generate_pmf(unc, cfg);
  TravelTimePmf b = generate_pmf(unc, cfg);
  CHECK(a.t_s == b.t_s);
  CHECK(a.mass == b.mass);
  CHECK(a.total_mass == b.total_mass);
  for (std::size_t k = 1; k < a.t_s.size(); ++k)
    CHECK(a.t_s[k] > a.t_s[k - 1]);
  for (double m : a.mass) CHECK(m >= 0.0);

  McConfig other = cfg;
  other.seed = 32;
  TravelTimePmf c = generate_pmf(unc, other);
  bool differs = false;
  for (std::size_t k = 0; k < a.mass.size(); ++k)
    differs = differs || a.mass[k] != c.mass[k];
  CHECK(differs);
}

TEST_CASE("wider parameter uncertainty widens the distribution") {
  const double h1 = 4.73, h2 = 0.105;
  McConfig cfg;
  cfg.n_samples = 20000;
  cfg.seed = 5;
  double prev_std = 0.0;
  int i = 0;
  for (double c : {0.0, 1.0, 4.0}) {
    RouteUncertainty unc =
        make_unc(h1, h2, c * 1e-3, c * 2e-5, c * 1e-5);
    // Widen the grid beyond the default so all three runs share bounds.
    cfg.a = h1 - 8.0 * std::sqrt(h2 + 4e-3);
    cfg.b = h1 + 8.0 * std::sqrt(h2 + 4e-3);
    ReliabilityReport rep = measures(generate_pmf(unc, cfg));
    if (i++ > 0) CHECK(rep.std_s >= prev_std);
    prev_std = rep.std_s;
  }
}

TEST_CASE("measures of hand-built distributions") {
  SUBCASE("point mass") {
    TravelTimePmf pmf;
    pmf.t_s = {100.0};
    pmf.mass = {1.0};
    pmf.total_mass = 1.0;
    ReliabilityReport rep = measures(pmf);
    CHECK(rep.mean_s == 100.0);
    CHECK(rep.std_s == 0.0);
    CHECK(rep.coeff_var == 0.0);
    CHECK(rep.pct95_s == 100.0);
    CHECK(rep.pct15_s == 100.0);
    CHECK(rep.buffer_index == 0.0);
    CHECK(rep.planning_index == 1.0);
  }
  SUBCASE("discrete uniform on 1..100") {
    TravelTimePmf pmf;
    for (int t = 1; t <= 100; ++t) {
      pmf.t_s.push_back(t);
      pmf.mass.push_back(0.01);
    }
    pmf.total_mass = 1.0;
    ReliabilityReport rep = measures(pmf);
    CHECK(rep.mean_s == doctest::Approx(50.5).epsilon(1e-12));
    CHECK(rep.std_s == doctest::Approx(std::sqrt(833.25)).epsilon(1e-9));
    CHECK(rep.pct95_s >= 94.0);
    CHECK(rep.pct95_s <= 96.0);
    CHECK(rep.pct15_s >= 14.0);
    CHECK(rep.pct15_s <= 16.0);
    CHECK(rep.planning_index == doctest::Approx(rep.pct95_s / rep.pct15_s));
  }
  SUBCASE("renormalization makes scale irrelevant") {
    TravelTimePmf pmf;
    for (int t = 1; t <= 10; ++t) {
      pmf.t_s.push_back(10.0 * t);
      pmf.mass.push_back(0.03); // totals 0.3, not 1
    }
    pmf.total_mass = 0.3;
    TravelTimePmf scaled = pmf;
    for (double& m : scaled.mass) m *= 2.5;
    scaled.total_mass = 0.75;
    ReliabilityReport r1 = measures(pmf), r2 = measures(scaled);
    CHECK(r1.mean_s == doctest::Approx(r2.mean_s).epsilon(1e-12));
    CHECK(r1.pct95_s == doctest::Approx(r2.pct95_s).epsilon(1e-12));
    CHECK(r1.std_s == doctest::Approx(r2.std_s).epsilon(1e-12));
  }
  SUBCASE("degenerate inputs throw") {
    TravelTimePmf empty;
    CHECK_THROWS_AS(measures(empty), Error);
    TravelTimePmf zero;
    zero.t_s = {1.0};
    zero.mass = {0.0};
    CHECK_THROWS_AS(measures(zero), Error);
    TravelTimePmf neg;
    neg.t_s = {1.0};
    neg.mass = {-0.5};
    CHECK_THROWS_AS(measures(neg), Error);
  }
}

TEST_CASE("a short unreliable route scores worse than a long reliable one") {
  NetworkModel net = load_network(R"({
    "speeds": {"v_mps": 10.0, "v_prime_mps": 5.0},
    "links": [
      {"id": 1, "from": "A", "to": "B", "length_m": 3000.0},
      {"id": 2, "from": "C", "to": "D", "length_m": 1000.0}
    ],
    "routes": [{"id": 1, "link_ids": [1]}, {"id": 2, "link_ids": [2]}]
  })");
  ObservationSet obs = ObservationSet::from_records(
      net, testutil::link_records({95, 11}, {100, 20}), {});
  FitResult fr = fit(net, obs);
  REQUIRE(fr.converged);

  McConfig cfg;
  cfg.n_samples = 5000;
  ReliabilityReport rel1 =
      measures(generate_pmf(route_uncertainty(net, net.route(1), fr), cfg));
  ReliabilityReport rel2 =
      measures(generate_pmf(route_uncertainty(net, net.route(2), fr), cfg));
  CHECK(rel2.mean_s < rel1.mean_s); // shorter route is faster on average
  CHECK(rel2.buffer_index > rel1.buffer_index);
  CHECK(rel2.planning_index > rel1.planning_index);
  CHECK(rel2.coeff_var > rel1.coeff_var);
}

TEST_CASE("pmf csv echoes the configuration") {
  RouteUncertainty unc = make_unc(4.73, 0.105, 0.0, 0.0, 0.0);
  McConfig cfg;
  cfg.n_samples = 10;
  TravelTimePmf pmf = generate_pmf(unc, cfg);
  std::string csv = pmf_to_csv(pmf, cfg);
  CHECK(csv.find("# n_samples=10") != std::string::npos);
  CHECK(csv.find("t_seconds,mass") != std::string::npos);
  CHECK(csv.find("total_mass=") != std::string::npos);
}
