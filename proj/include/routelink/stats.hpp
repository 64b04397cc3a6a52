#ifndef ROUTELINK_STATS_HPP
#define ROUTELINK_STATS_HPP

#include <string>
#include <vector>

#include "routelink/ingest.hpp"

namespace routelink {

/// Cross-classification of two links over their shared observation days,
/// rows indexed by the first link's state:
///   a = both success   b = first success, second failure
///   c = second success only   d = both failure
/// Margins n1 = a+b and n2 = c+d are the day counts with the first link in
/// each state; independence means the second link's success rate is the
/// same in both rows.
struct TwoByTwoTable {
  long a = 0, b = 0, c = 0, d = 0;

  long n1() const { return a + b; }
  long n2() const { return c + d; }
};

/// Unconditional exact p-value for independence. Rows are modeled as two
/// binomials with a common nuisance success probability under the null;
/// the statistic is the score (pooled-variance) z for the difference of
/// row proportions, and the p-value maximizes the probability of
/// |T| >= |T_observed| over the nuisance grid {delta, 2 delta, .., 1-delta},
/// delta = 1/grid_resolution. Region membership is decided in exact integer
/// arithmetic.
double barnard_p(const TwoByTwoTable& table, int grid_resolution = 1000);

struct PairResult {
  int link_i = 0;
  int link_j = 0;
  long shared_days = 0;
  double p_value = 1.0;
};

struct IndependenceReport {
  std::vector<PairResult> pairs; // within-subset pairs, i < j
  std::vector<std::string> skipped;
  double threshold = 0.05;
  double bonferroni_level = 0.0; // threshold / pairs.size()
  double fraction_below_threshold = 0.0;
  double min_p = 1.0;
  bool any_below_bonferroni = false;
};

/// Tests every within-subset link pair sharing at least 2 observation days.
/// Pairs with fewer shared days, or where one link never varies over the
/// shared days, are skipped with a notice.
IndependenceReport test_subset(const ObservationSet& obs,
                               const SubsetSchedule& sched,
                               double threshold = 0.05,
                               int grid_resolution = 1000);

std::string independence_to_csv(const IndependenceReport& rep);
std::string independence_summary(const IndependenceReport& rep);

} // namespace routelink

#endif
