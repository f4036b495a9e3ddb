#include <doctest.h>

#include <cmath>
#include <vector>

#include "cate/lp_oracle.hpp"
#include "cate/metrics.hpp"
#include "fixtures.hpp"
#include "random_instance.hpp"

using namespace cate;
using cate::testing::RandomInstance;

namespace {

constexpr std::uint64_t kInstances = 60;
constexpr ObjectiveKind kObjectives[] = {ObjectiveKind::kMaxLinkUtilization, ObjectiveKind::kPathLength,
                                         ObjectiveKind::kPathDelay};

FlowAssignment start_of(const RandomInstance& inst, BaselinePolicy policy = BaselinePolicy::kNearest) {
  return baseline_place(inst.problem.adjustable, true, 0, inst.routing, {policy, 17});
}

GreedySortFlowResult gsf(const RandomInstance& inst, ObjectiveKind k) {
  return greedy_sort_flow(inst.problem, start_of(inst), inst.topo, inst.routing, k, {60});
}

MetricsReport metrics_of(const FlowAssignment& a, const RandomInstance& inst) {
  const MetricsReport m = compute_metrics(a, recompute_state(a, inst.topo, inst.routing), inst.routing, inst.topo);
  CHECK(std::abs(m.total_traffic - m.flow_traffic) <= kTrafficIdentityTolerance * std::max(1.0, m.flow_traffic));
  return m;
}

// Every demand, capacity and background volume multiplied by `s`.
RandomInstance scaled(const RandomInstance& inst, double s) {
  std::vector<Node> nodes = inst.topo.nodes();
  std::vector<Link> links = inst.topo.links();
  for (Link& l : links) l.capacity *= s;
  NetworkTopology topo(std::move(nodes), std::move(links));
  RoutingMatrix routing = compute_routing(topo);
  BinProblem problem = inst.problem;
  for (SubFlowDemand& d : problem.adjustable) d.volume *= s;
  for (SubFlowAssignment& f : problem.fixed.flows()) {
    for (Placement& p : f.placements) p.volume *= s;
  }
  for (BackgroundDemand& b : problem.fixed.background()) b.volume *= s;
  return {std::move(topo), std::move(routing), inst.matrix, inst.split, std::move(problem)};
}

}  // namespace

TEST_CASE("every engine conserves demand and respects eligibility") {
  for (std::uint64_t seed = 1; seed <= kInstances; ++seed) {
    CAPTURE(seed);
    const RandomInstance inst = cate::testing::random_instance(seed);
    const auto& demands = inst.problem.adjustable;
    for (BaselinePolicy p : {BaselinePolicy::kNearest, BaselinePolicy::kRandom}) {
      CHECK_FALSE(find_violation(start_of(inst, p), demands).has_value());
    }
    for (ObjectiveKind k : kObjectives) {
      const GreedySortFlowResult r = gsf(inst, k);
      CHECK_FALSE(find_violation(r.assignment, demands).has_value());
      CHECK(r.state.matches(recompute_state(r.assignment, inst.topo, inst.routing)));
      metrics_of(r.assignment, inst);

      const AssignmentResult o = online_greedy_assign(make_requests(demands, 7, seed), inst.topo, inst.routing,
                                                      EligibleSets(demands),
                                                      recompute_state(inst.problem.fixed, inst.topo, inst.routing), k);
      CHECK_FALSE(find_violation(o.assignment, demands).has_value());
      FlowAssignment full = inst.problem.fixed;
      full.append(o.assignment);
      CHECK(o.state.matches(recompute_state(full, inst.topo, inst.routing)));
      metrics_of(full, inst);
    }
    if (!demands.empty()) {
      const LpInstance lp = build_lp(inst.problem, inst.topo, inst.routing);
      const FlowAssignment opt = lp_assignment(lp, solve_lp(lp), inst.problem.fixed);
      CHECK_FALSE(find_violation(opt, demands).has_value());
      metrics_of(opt, inst);
    }
  }
}

TEST_CASE("Greedy-Sort-Flow never worsens its objective") {
  for (std::uint64_t seed = 1; seed <= kInstances; ++seed) {
    CAPTURE(seed);
    const RandomInstance inst = cate::testing::random_instance(seed);
    for (ObjectiveKind k : kObjectives) {
      CAPTURE(to_string(k));
      const GreedySortFlowResult r = gsf(inst, k);
      REQUIRE(r.objective_history.size() == static_cast<std::size_t>(r.iterations_used) + 1);
      for (std::size_t i = 1; i < r.objective_history.size(); ++i) {
        CHECK(r.objective_history[i] <= r.objective_history[i - 1] * (1.0 + 1e-12) + 1e-12);
      }
      CHECK(r.objective_history.back() ==
            doctest::Approx(objective_value(r.assignment, r.state, inst.topo, inst.routing, k)));
    }
  }
}

TEST_CASE("utilizations are invariant under joint scaling of volumes and capacities") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    CAPTURE(seed);
    const RandomInstance inst = cate::testing::random_instance(seed);
    if (inst.problem.adjustable.empty()) continue;
    const RandomInstance big = scaled(inst, 8.0);
    CHECK(gsf(big, ObjectiveKind::kMaxLinkUtilization).state.max_utilization() ==
          doctest::Approx(gsf(inst, ObjectiveKind::kMaxLinkUtilization).state.max_utilization()).epsilon(1e-9));
    CHECK(solve_lp(build_lp(big.problem, big.topo, big.routing)).max_utilization ==
          doctest::Approx(solve_lp(build_lp(inst.problem, inst.topo, inst.routing)).max_utilization).epsilon(1e-9));
  }
}

TEST_CASE("reductions are antisymmetric in sign") {
  for (std::uint64_t seed = 1; seed <= kInstances; ++seed) {
    const RandomInstance inst = cate::testing::random_instance(seed);
    FlowAssignment base = inst.problem.fixed;
    base.append(start_of(inst, BaselinePolicy::kRandom));
    const MetricsReport a = metrics_of(base, inst);
    const MetricsReport b = metrics_of(gsf(inst, ObjectiveKind::kMaxLinkUtilization).assignment, inst);
    const ReductionReport ab = compare_reports(a, b);
    const ReductionReport ba = compare_reports(b, a);
    for (auto [x, y] : {std::pair{ab.max_link_utilization, ba.max_link_utilization},
                        std::pair{ab.total_traffic, ba.total_traffic},
                        std::pair{ab.accumulated_delay, ba.accumulated_delay}}) {
      CHECK((x > 0.0) == (y < 0.0));
      CHECK((x == 0.0) == (y == 0.0));
    }
  }
}

TEST_CASE("the path-length objective never carries more traffic than the random baseline") {
  for (std::uint64_t seed = 1; seed <= kInstances; ++seed) {
    CAPTURE(seed);
    const RandomInstance inst = cate::testing::random_instance(seed);
    FlowAssignment base = inst.problem.fixed;
    base.append(start_of(inst, BaselinePolicy::kRandom));
    const double random_traffic = metrics_of(base, inst).total_traffic;
    const double cate_traffic = metrics_of(gsf(inst, ObjectiveKind::kPathLength).assignment, inst).total_traffic;
    CHECK(cate_traffic <= random_traffic + 1e-9);
  }
}

TEST_CASE("Greedy-Sort-Flow against the LP optimum") {
  int within = 0;
  int total = 0;
  for (std::uint64_t seed = 1; seed <= kInstances; ++seed) {
    const RandomInstance inst = cate::testing::random_instance(seed);
    if (inst.problem.adjustable.empty()) continue;
    const double lp = solve_lp(build_lp(inst.problem, inst.topo, inst.routing)).max_utilization;
    const double l = gsf(inst, ObjectiveKind::kMaxLinkUtilization).state.max_utilization();
    CHECK(lp <= l + 1e-9);
    ++total;
    if (l <= lp * 1.01) ++within;
  }
  MESSAGE(within << " of " << total << " instances within 1% of the LP optimum");
}
