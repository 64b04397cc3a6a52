#include "routelink/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <string>

#include "routelink/bridge.hpp"
#include "routelink/errors.hpp"
#include "routelink/rng.hpp"

namespace routelink {

namespace {

// Seed streams; distinct constants keep link, route, and link-sum draws
// independent under one master seed.
constexpr std::uint64_t kLinkStream = 1;
constexpr std::uint64_t kRouteStream = 2;
constexpr std::uint64_t kLinkSumStream = 3;

std::string day_name(char prefix, int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%c%06d", prefix, i);
  return buf;
}

void check_gt(const GroundTruth& gt) {
  if (gt.net == nullptr) throw Error("ground truth has no network");
  const int p = gt.net->num_links();
  if (gt.theta_star.size() != p)
    throw Error("theta_star has " + std::to_string(gt.theta_star.size()) +
                " entries, network has " + std::to_string(p) + " links");
  for (int j = 0; j < p; ++j) {
    const double r = gt.theta_star[j];
    if (!(r >= 0.0 && r <= 1.0))
      throw Error("theta_star[" + std::to_string(j + 1) +
                  "] = " + std::to_string(r) + " outside [0,1]");
  }
}

} // namespace

GroundTruth make_ground_truth(const NetworkModel& net,
                              Eigen::VectorXd theta_star, std::uint64_t seed) {
  GroundTruth gt{&net, std::move(theta_star), seed};
  check_gt(gt);
  return gt;
}

std::vector<LinkObservation> simulate_links(const GroundTruth& gt,
                                            int n_days) {
  check_gt(gt);
  if (n_days < 1) throw Error("n_days must be >= 1");
  std::vector<LinkObservation> out;
  out.reserve(static_cast<size_t>(gt.net->num_links()) *
              static_cast<size_t>(n_days));
  for (const Link& link : gt.net->links) {
    std::mt19937_64 rng(derive_seed(gt.seed, kLinkStream,
                                    static_cast<std::uint64_t>(link.id)));
    std::bernoulli_distribution success(gt.theta_star[link.id - 1]);
    for (int d = 1; d <= n_days; ++d)
      out.push_back({day_name('L', d), link.id,
                     success(rng) ? LinkState::green : LinkState::red});
  }
  return out;
}

std::vector<LinkObservation> simulate_links(const GroundTruth& gt,
                                            const SubsetSchedule& sched) {
  check_gt(gt);
  if (sched.day_subset.empty()) throw Error("schedule assigns no days");
  std::vector<LinkObservation> out;
  for (const Link& link : gt.net->links) {
    const int sub = sched.subset_of(link.id);
    if (sub == 0)
      throw Error("link " + std::to_string(link.id) + " not in the schedule");
    std::mt19937_64 rng(derive_seed(gt.seed, kLinkStream,
                                    static_cast<std::uint64_t>(link.id)));
    std::bernoulli_distribution success(gt.theta_star[link.id - 1]);
    for (const auto& [day, day_sub] : sched.day_subset) {
      if (day_sub != sub) continue;
      out.push_back({day, link.id,
                     success(rng) ? LinkState::green : LinkState::red});
    }
  }
  return out;
}

std::vector<RouteObservation>
simulate_routes(const GroundTruth& gt, int k_days,
                std::vector<std::string>* warnings) {
  check_gt(gt);
  if (k_days < 1) throw Error("k_days must be >= 1");
  std::vector<RouteObservation> out;
  out.reserve(static_cast<size_t>(gt.net->num_routes()) *
              static_cast<size_t>(k_days));
  for (const Route& route : gt.net->routes) {
    BridgeEval ev = eval_route(*gt.net, route, gt.theta_star);
    std::mt19937_64 rng(derive_seed(gt.seed, kRouteStream,
                                    static_cast<std::uint64_t>(route.id)));
    if (ev.h2 <= 0.0) {
      if (warnings)
        warnings->push_back("route " + std::to_string(route.id) +
                            ": zero variance, emitting constant times");
      for (int d = 1; d <= k_days; ++d)
        out.push_back({day_name('R', d), route.id, std::exp(ev.h1)});
      continue;
    }
    std::normal_distribution<double> z(ev.h1, std::sqrt(ev.h2));
    for (int d = 1; d <= k_days; ++d)
      out.push_back({day_name('R', d), route.id, std::exp(z(rng))});
  }
  return out;
}

std::vector<RouteObservation> simulate_routes_linksum(const GroundTruth& gt,
                                                      int k_days) {
  check_gt(gt);
  if (k_days < 1) throw Error("k_days must be >= 1");
  const SpeedPair& sp = gt.net->speeds;
  std::vector<RouteObservation> out;
  for (const Route& route : gt.net->routes) {
    std::mt19937_64 rng(derive_seed(gt.seed, kLinkSumStream,
                                    static_cast<std::uint64_t>(route.id)));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int d = 1; d <= k_days; ++d) {
      double t = 0.0;
      for (int lid : route.link_ids) {
        const Link& link = gt.net->link(lid);
        const bool ok = unif(rng) < gt.theta_star[lid - 1];
        t += link.length_m /
             (ok ? sp.v_success_mps : sp.v_failure_mps);
      }
      out.push_back({day_name('R', d), route.id, t});
    }
  }
  return out;
}

SubsetSchedule make_default_schedule(const NetworkModel& net, int n_days) {
  if (n_days < 2) throw Error("need at least 2 days for two subsets");
  SubsetSchedule sched;
  std::set<std::string> nodes1, nodes2;
  auto fits = [](const std::set<std::string>& used, const Link& l) {
    return used.count(l.from_node) == 0 && used.count(l.to_node) == 0;
  };
  for (const Link& link : net.links) {
    const bool f1 = fits(nodes1, link);
    const bool f2 = fits(nodes2, link);
    int pick;
    if (f1 && f2)
      pick = sched.subset1.size() <= sched.subset2.size() ? 1 : 2;
    else if (f1)
      pick = 1;
    else if (f2)
      pick = 2;
    else
      // no adjacency-free slot; keep sizes balanced
      pick = sched.subset1.size() <= sched.subset2.size() ? 1 : 2;
    auto& ids = pick == 1 ? sched.subset1 : sched.subset2;
    auto& used = pick == 1 ? nodes1 : nodes2;
    ids.push_back(link.id);
    used.insert(link.from_node);
    used.insert(link.to_node);
  }
  for (int d = 1; d <= n_days; ++d)
    sched.day_subset[day_name('L', d)] = d % 2 == 1 ? 1 : 2;
  return sched;
}

} // namespace routelink
