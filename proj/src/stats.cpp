#include "routelink/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "routelink/errors.hpp"

namespace routelink {

namespace {

double lchoose(long n, long k) {
  return std::lgamma(static_cast<double>(n + 1)) -
         std::lgamma(static_cast<double>(k + 1)) -
         std::lgamma(static_cast<double>(n - k + 1));
}

} // namespace

double barnard_p(const TwoByTwoTable& table, int grid_resolution) {
  const long n1 = table.n1(), n2 = table.n2();
  if (table.a < 0 || table.b < 0 || table.c < 0 || table.d < 0)
    throw Error("negative count in 2x2 table");
  if (n1 < 1 || n2 < 1) throw Error("degenerate margin in 2x2 table");
  if (grid_resolution < 100) throw Error("grid resolution must be >= 100");
  const long N = n1 + n2;
  if (N > 2000) throw Error("table too large for exact region arithmetic");

  // T^2 = N u^2 / (n1 n2 m (N-m)) with u = a n2 - c n1, m = a + c.
  // |T| >= |T_obs| compares u^2 * w_obs >= u_obs^2 * w with w = m (N-m),
  // exactly in integers. Tables with w = 0 have T = 0 by convention.
  const long u_obs = table.a * n2 - table.c * n1;
  const long m_obs = table.a + table.c;
  const long w_obs = m_obs * (N - m_obs);
  if (u_obs == 0 || w_obs == 0) return 1.0; // zero statistic dominates nothing

  // Region weights grouped by total successes m: w[m] = sum over in-region
  // (a,c) with a+c=m of C(n1,a) C(n2,c), kept in log space.
  std::vector<double> logw(static_cast<std::size_t>(N + 1),
                           -std::numeric_limits<double>::infinity());
  for (long a = 0; a <= n1; ++a) {
    for (long c = 0; c <= n2; ++c) {
      const long m = a + c;
      const long w = m * (N - m);
      if (w == 0) continue;
      const long u = a * n2 - c * n1;
      if (u * u * w_obs < u_obs * u_obs * w) continue;
      const double lt = lchoose(n1, a) + lchoose(n2, c);
      double& slot = logw[static_cast<std::size_t>(m)];
      slot = slot == -std::numeric_limits<double>::infinity()
                 ? lt
                 : std::max(slot, lt) +
                       std::log1p(std::exp(-std::abs(slot - lt)));
    }
  }

  double p = 0.0;
  for (int i = 1; i < grid_resolution; ++i) {
    const double pi = static_cast<double>(i) / grid_resolution;
    const double lp = std::log(pi), lq = std::log1p(-pi);
    double s = 0.0;
    for (long m = 0; m <= N; ++m) {
      const double lw = logw[static_cast<std::size_t>(m)];
      if (lw == -std::numeric_limits<double>::infinity()) continue;
      s += std::exp(lw + static_cast<double>(m) * lp +
                    static_cast<double>(N - m) * lq);
    }
    p = std::max(p, s);
  }
  return std::min(1.0, p);
}

IndependenceReport test_subset(const ObservationSet& obs,
                               const SubsetSchedule& sched, double threshold,
                               int grid_resolution) {
  IndependenceReport rep;
  rep.threshold = threshold;

  auto run_subset = [&](const std::vector<int>& subset) {
    std::vector<int> ids = subset;
    std::sort(ids.begin(), ids.end());
    for (std::size_t x = 0; x < ids.size(); ++x) {
      for (std::size_t y = x + 1; y < ids.size(); ++y) {
        const int li = ids[x], lj = ids[y];
        const auto& si = obs.link_states[static_cast<std::size_t>(li - 1)];
        const auto& sj = obs.link_states[static_cast<std::size_t>(lj - 1)];
        TwoByTwoTable t;
        long shared = 0;
        for (const auto& [day, oki] : si) {
          auto it = sj.find(day);
          if (it == sj.end()) continue;
          ++shared;
          const bool okj = it->second;
          if (oki)
            ++(okj ? t.a : t.b);
          else
            ++(okj ? t.c : t.d);
        }
        char note[128];
        if (shared < 2) {
          std::snprintf(note, sizeof(note),
                        "links %d,%d: only %ld shared days", li, lj, shared);
          rep.skipped.push_back(note);
          continue;
        }
        if (t.n1() == 0 || t.n2() == 0) {
          std::snprintf(note, sizeof(note),
                        "links %d,%d: link %d constant over %ld shared days",
                        li, lj, li, shared);
          rep.skipped.push_back(note);
          continue;
        }
        rep.pairs.push_back(
            {li, lj, shared, barnard_p(t, grid_resolution)});
      }
    }
  };
  run_subset(sched.subset1);
  run_subset(sched.subset2);

  const std::size_t n = rep.pairs.size();
  rep.bonferroni_level = n > 0 ? threshold / static_cast<double>(n) : 0.0;
  std::size_t below = 0;
  for (const auto& pr : rep.pairs) {
    rep.min_p = std::min(rep.min_p, pr.p_value);
    if (pr.p_value < threshold) ++below;
    if (n > 0 && pr.p_value < rep.bonferroni_level)
      rep.any_below_bonferroni = true;
  }
  rep.fraction_below_threshold =
      n > 0 ? static_cast<double>(below) / static_cast<double>(n) : 0.0;
  return rep;
}

std::string independence_to_csv(const IndependenceReport& rep) {
  std::string out = "link_i,link_j,shared_days,p_value\n";
  char buf[96];
  for (const auto& pr : rep.pairs) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%ld,%.10g\n", pr.link_i,
                  pr.link_j, pr.shared_days, pr.p_value);
    out += buf;
  }
  return out;
}

std::string independence_summary(const IndependenceReport& rep) {
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof(buf), "pairs tested:        %zu\n",
                rep.pairs.size());
  out += buf;
  std::snprintf(buf, sizeof(buf), "pairs skipped:       %zu\n",
                rep.skipped.size());
  out += buf;
  std::snprintf(buf, sizeof(buf), "threshold:           %.4g\n",
                rep.threshold);
  out += buf;
  std::snprintf(buf, sizeof(buf), "fraction below it:   %.4f\n",
                rep.fraction_below_threshold);
  out += buf;
  std::snprintf(buf, sizeof(buf), "smallest p-value:    %.6g\n", rep.min_p);
  out += buf;
  std::snprintf(buf, sizeof(buf), "Bonferroni level:    %.6g\n",
                rep.bonferroni_level);
  out += buf;
  if (rep.pairs.empty()) {
    out += "verdict: no testable pairs\n";
  } else if (rep.any_below_bonferroni) {
    out += "verdict: at least one pair is dependent at the corrected level\n";
  } else {
    out += "verdict: no pair significant at the corrected level; consistent "
           "with between-link independence\n";
  }
  return out;
}

} // namespace routelink
