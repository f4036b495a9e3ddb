// Acceptance suite: one PASS/FAIL line per criterion.
//
//   cate_acceptance [--data DIR] [--only ID]... [--expect-fail ID]...
//
// Exit status is 0 when every failing criterion was listed with
// --expect-fail and every listed criterion did fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "cate/lp_oracle.hpp"
#include "cate/metrics.hpp"
#include "cate/scenario.hpp"
#include "random_instance.hpp"

namespace fs = std::filesystem;
using namespace cate;

namespace {

// Tolerances and limits.
constexpr double kExact = 1e-12;
constexpr double kLpTolerance = 1e-9;
constexpr double kFluidGap = 0.01;
constexpr std::size_t kFluidQuanta = 1000;
constexpr std::uint64_t kRandomInstances = 100;
constexpr int kTwoBottleneckOrders = 50;
constexpr int kMaxPasses = 3;
constexpr double kImprovedBinShare = 0.95;
constexpr double kMaxWorsening = 0.05;
constexpr double kTwoBottleneckSeconds = 1.0;
constexpr double kRandomSeconds = 120.0;
constexpr double kAbileneSeconds = 300.0;
constexpr double kNetflixSeconds = 120.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool identity_holds(const MetricsReport& m) {
  return std::abs(m.total_traffic - m.flow_traffic) <=
         kTrafficIdentityTolerance * std::max(1.0, std::abs(m.flow_traffic));
}

const ObjectiveRun& objective(const VariantRun& v, ObjectiveKind k) {
  for (const ObjectiveRun& o : v.objectives) {
    if (o.objective == k) return o;
  }
  throw Error(ErrorKind::kConfig, fmt::format("objective {} was not run", to_string(k)));
}

struct Shipped {
  std::string id;
  fs::path config;
  ScenarioResult result;
  double seconds = 0.0;
};

class Suite {
 public:
  explicit Suite(fs::path data) : data_(std::move(data)) {}

  Outcome two_bottleneck() {
    const Stopwatch clock;
    const NetworkTopology topo = load_topology_file(data_ / "two_bottleneck" / "topology.json");
    const RoutingMatrix routing = compute_routing(topo);
    const ContentDemandMatrix matrix = ingest_demands_file(data_ / "two_bottleneck" / "demands.json", topo);
    const BinProblem problem = make_bin_problem(split_adjustable(matrix, 0, {1, 2}), routing, {});

    const double lp = solve_lp(build_lp(problem, topo, routing)).max_utilization;
    const GreedySortFlowResult gsf =
        greedy_sort_flow(problem, baseline_place(problem.adjustable, true, 0, routing, {}), topo, routing,
                         ObjectiveKind::kMaxLinkUtilization);
    const double g = gsf.state.max_utilization();
    record(gsf.assignment, gsf.state, routing, topo);

    int balanced = 0;
    for (int order = 1; order <= kTwoBottleneckOrders; ++order) {
      const auto requests = make_quantum_requests(problem.adjustable, 1.0, static_cast<std::uint64_t>(order));
      const AssignmentResult r =
          online_greedy_assign(requests, topo, routing, EligibleSets(problem.adjustable),
                               recompute_state(problem.fixed, topo, routing), ObjectiveKind::kMaxLinkUtilization);
      if (std::abs(r.state.max_utilization() - 0.5) <= kExact) ++balanced;
    }
    const double seconds = clock.seconds();
    const bool pass = std::abs(lp - 0.5) <= kLpTolerance && std::abs(g - 0.5) <= kExact &&
                      balanced == kTwoBottleneckOrders && seconds < kTwoBottleneckSeconds;
    return {pass, fmt::format("L*={:.12g} greedy-sort-flow={:.12g} online=0.5 in {}/{} orders, {:.3f} s", lp, g,
                              balanced, kTwoBottleneckOrders, seconds)};
  }

  Outcome fluid_limit() {
    const Stopwatch clock;
    std::vector<std::uint64_t> over;
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= kRandomInstances; ++seed) {
      const auto inst = cate::testing::random_instance(seed);
      const double lp = lp_optimum(inst);
      const double l = online(inst, make_requests(inst.problem.adjustable, kFluidQuanta));
      const double gap = lp > 0.0 ? (l - lp) / lp : 0.0;
      worst = std::max(worst, gap);
      if (gap > kFluidGap) over.push_back(seed);
    }
    const double seconds = clock.seconds();
    std::string seeds;
    for (std::uint64_t s : over) seeds += fmt::format("{}{}", seeds.empty() ? "" : ",", s);
    return {over.empty() && seconds < kRandomSeconds,
            fmt::format("{}/{} instances within {:.0f}% at Q={}, worst gap {:.4f}{}, {:.1f} s",
                        kRandomInstances - over.size(), kRandomInstances, kFluidGap * 100, kFluidQuanta, worst,
                        over.empty() ? "" : " (seeds " + seeds + ")", seconds)};
  }

  Outcome log_bound() {
    const Stopwatch clock;
    int violations = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= kRandomInstances; ++seed) {
      const auto inst = cate::testing::random_instance(seed);
      const double lp = lp_optimum(inst);
      const double l = online(inst, make_quantum_requests(inst.problem.adjustable, 1.0));
      const std::size_t n = std::max<std::size_t>(1, cate::testing::eligible_link_count(inst));
      const double factor = std::ceil(std::log2(static_cast<double>(n))) + 1.0;
      if (l > factor * lp * (1.0 + kExact) + kExact) ++violations;
      if (lp > 0.0) worst = std::max(worst, l / (factor * lp));
    }
    const double seconds = clock.seconds();
    return {violations == 0 && seconds < kRandomSeconds,
            fmt::format("{} violations in {} instances with unit quanta, max L/bound {:.3f}, {:.1f} s", violations,
                        kRandomInstances, worst, seconds)};
  }

  Outcome convergence() {
    int runs = 0;
    int worst = 0;
    std::size_t bad = 0;
    for (const Shipped& s : shipped()) {
      for (const VariantRun& v : s.result.variants) {
        for (const ObjectiveRun& o : v.objectives) {
          for (std::size_t t = 0; t < o.iterations.size(); ++t) {
            ++runs;
            worst = std::max(worst, o.iterations[t]);
            const auto& h = o.objective_history[t];
            bool monotone = true;
            for (std::size_t i = 1; i < h.size(); ++i) {
              monotone = monotone && h[i] <= h[i - 1] * (1.0 + kExact) + kExact;
            }
            if (!o.converged[t] || o.iterations[t] > kMaxPasses || !monotone) ++bad;
          }
        }
      }
    }
    return {bad == 0 && runs > 0, fmt::format("{} bin runs over {} shipped scenarios, max {} passes, {} failing",
                                              runs, shipped().size(), worst, bad)};
  }

  Outcome traffic_identity() {
    for (const Shipped& s : shipped()) {
      for (const VariantRun& v : s.result.variants) {
        for (const MetricsReport& m : v.baseline) check_identity(m);
        for (const ObjectiveRun& o : v.objectives) {
          for (const MetricsReport& m : o.cate) check_identity(m);
        }
      }
    }
    return {reports_ > 0 && identity_failures_ == 0,
            fmt::format("{} reports checked, {} outside {:g}", reports_, identity_failures_,
                        kTrafficIdentityTolerance)};
  }

  Outcome abilene() {
    const Shipped& s = find("abilene");
    const VariantRun& v = s.result.variants.at(0);
    const ObjectiveRun& mlu = objective(v, ObjectiveKind::kMaxLinkUtilization);
    const std::size_t bins = v.baseline.size();
    std::size_t improved = 0;
    double worst_hops = 0.0;
    double worst_delay = 0.0;
    for (std::size_t t = 0; t < bins; ++t) {
      const ReductionReport r = compare_reports(v.baseline[t], mlu.cate[t]);
      if (mlu.cate[t].max_link_utilization < v.baseline[t].max_link_utilization) ++improved;
      worst_hops = std::min(worst_hops, r.mean_hops);
      worst_delay = std::min(worst_delay, r.accumulated_delay);
    }
    const double share = bins ? static_cast<double>(improved) / static_cast<double>(bins) : 0.0;

    // Against nearest placement the path-length objective has nothing to
    // gain, so traffic reduction is measured against random placement.
    const Stopwatch clock;
    const ScenarioConfig random_config = load_config_file(
        s.config, std::vector<std::string>{"baseline.policy=random", "objectives=path-length"});
    const ScenarioResult random = evaluate_scenario(random_config);
    const double random_seconds = clock.seconds();
    const VariantRun& rv = random.variants.at(0);
    const ObjectiveRun& pl = objective(rv, ObjectiveKind::kPathLength);
    std::size_t decreased = 0;
    double least = 1.0;
    for (std::size_t t = 0; t < rv.baseline.size(); ++t) {
      check_identity(rv.baseline[t]);
      check_identity(pl.cate[t]);
      if (pl.cate[t].total_traffic < rv.baseline[t].total_traffic) ++decreased;
      least = std::min(least, relative_reduction(rv.baseline[t].total_traffic, pl.cate[t].total_traffic));
    }
    const ObjectiveRun& pl_nearest = objective(v, ObjectiveKind::kPathLength);
    double nearest_gain = 0.0;
    for (std::size_t t = 0; t < bins; ++t) {
      nearest_gain = std::max(nearest_gain, relative_reduction(v.baseline[t].total_traffic, pl_nearest.cate[t].total_traffic));
    }

    const bool pass = bins == 288 && share >= kImprovedBinShare && decreased == rv.baseline.size() &&
                      -worst_hops <= kMaxWorsening && -worst_delay <= kMaxWorsening &&
                      s.seconds < kAbileneSeconds && random_seconds < kAbileneSeconds;
    return {pass, fmt::format("max-util lower in {}/{} bins; path-length traffic lower in {}/{} bins vs random "
                              "(min reduction {:.3f}; vs nearest at most {:.2g}); max-util worsens hops by {:.4f}, delay by {:.4f}; "
                              "{:.1f} s + {:.1f} s",
                              improved, bins, decreased, rv.baseline.size(), least, nearest_gain, std::max(0.0, -worst_hops),
                              std::max(0.0, -worst_delay), s.seconds, random_seconds)};
  }

  Outcome netflix() {
    const Shipped& s = find("netflix");
    std::optional<PeakSummary> one, twenty;
    for (const VariantRun& v : s.result.variants) {
      const PeakSummary p = summarize_peak(v.baseline, objective(v, ObjectiveKind::kMaxLinkUtilization).cate);
      if (v.factor == 1.0) one = p;
      if (v.factor == 20.0) twenty = p;
    }
    if (!one || !twenty) return {false, "sweep lacks factor 1 or 20"};
    return {twenty->peak_reduction >= one->peak_reduction && twenty->cate_peak < twenty->baseline_peak &&
                s.seconds < kNetflixSeconds,
            fmt::format("peak reduction {:.4f} at 1x, {:.4f} at 20x (peak {:.4f} -> {:.4f}); {:.1f} s",
                        one->peak_reduction, twenty->peak_reduction, twenty->baseline_peak, twenty->cate_peak,
                        s.seconds)};
  }

  Outcome determinism() {
    std::size_t files = 0;
    std::vector<std::string> differing;
    for (const Shipped& s : shipped()) {
      const fs::path a = scratch_ / (s.id + "_a");
      const fs::path b = scratch_ / (s.id + "_b");
      const auto first = run_into(s.config, a);
      const auto second = run_into(s.config, b);
      if (first.size() != second.size()) differing.push_back(s.id + " (file count)");
      for (std::size_t i = 0; i < std::min(first.size(), second.size()); ++i) {
        ++files;
        if (first[i].filename() != second[i].filename() || slurp(first[i]) != slurp(second[i])) {
          differing.push_back(first[i].filename().string());
        }
      }
    }
    std::string list;
    for (const std::string& d : differing) list += " " + d;
    return {differing.empty() && files > 0,
            fmt::format("{} report files compared across two runs of {} scenarios{}", files, shipped().size(),
                        differing.empty() ? "" : "; differing:" + list)};
  }

  ~Suite() {
    std::error_code ec;
    if (!scratch_.empty()) fs::remove_all(scratch_, ec);
  }

 private:
  const std::vector<Shipped>& shipped() {
    if (shipped_.empty()) {
      scratch_ = fs::temp_directory_path() / fmt::format("cate_acceptance_{}", ::getpid());
      for (const auto& [id, path] : {std::pair{"two_bottleneck", data_ / "two_bottleneck" / "scenario.json"},
                                     std::pair{"abilene", data_ / "abilene" / "scenario.json"},
                                     std::pair{"netflix", data_ / "abilene" / "netflix.json"}}) {
        const Stopwatch clock;
        ScenarioConfig config = load_config_file(path);
        ScenarioResult result = evaluate_scenario(config);
        shipped_.push_back({id, path, std::move(result), clock.seconds()});
      }
    }
    return shipped_;
  }

  const Shipped& find(const std::string& id) {
    for (const Shipped& s : shipped()) {
      if (s.id == id) return s;
    }
    throw Error(ErrorKind::kUnknownId, "no shipped scenario " + id);
  }

  std::vector<fs::path> run_into(const fs::path& config_path, const fs::path& dir) {
    const std::vector<std::string> overrides{"output.directory=" + dir.string()};
    ScenarioResult r = run_scenario(load_config_file(config_path, overrides));
    std::sort(r.files.begin(), r.files.end());
    return r.files;
  }

  double lp_optimum(const cate::testing::RandomInstance& inst) {
    return solve_lp(build_lp(inst.problem, inst.topo, inst.routing)).max_utilization;
  }

  double online(const cate::testing::RandomInstance& inst, const std::vector<Request>& requests) {
    const AssignmentResult r = online_greedy_assign(requests, inst.topo, inst.routing,
                                                    EligibleSets(inst.problem.adjustable),
                                                    recompute_state(inst.problem.fixed, inst.topo, inst.routing),
                                                    ObjectiveKind::kMaxLinkUtilization);
    FlowAssignment full = inst.problem.fixed;
    full.append(r.assignment);
    record(full, r.state, inst.routing, inst.topo);
    return r.state.max_utilization();
  }

  void record(const FlowAssignment& a, const LinkLoadState& state, const RoutingMatrix& routing,
              const NetworkTopology& topo) {
    try {
      check_identity(compute_metrics(a, state, routing, topo));
    } catch (const Error&) {
      ++reports_;
      ++identity_failures_;
    }
  }

  void check_identity(const MetricsReport& m) {
    ++reports_;
    if (!identity_holds(m)) ++identity_failures_;
  }

  fs::path data_;
  fs::path scratch_;
  std::vector<Shipped> shipped_;
  std::size_t reports_ = 0;
  std::size_t identity_failures_ = 0;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CaTE acceptance criteria"};
  std::string data = CATE_DATA_DIR;
  std::vector<std::string> only;
  std::vector<std::string> expect_fail;
  app.add_option("--data", data, "Directory holding the shipped scenarios");
  app.add_option("--only", only, "Run only these criteria");
  app.add_option("--expect-fail", expect_fail, "Criteria known to fail");
  CLI11_PARSE(app, argc, argv);

  Suite suite(data);
  // Random-instance criteria run before the identity check so their
  // reports are counted.
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"two_bottleneck_oracle", [&] { return suite.two_bottleneck(); }},
      {"fluid_limit", [&] { return suite.fluid_limit(); }},
      {"competitive_bound", [&] { return suite.log_bound(); }},
      {"convergence", [&] { return suite.convergence(); }},
      {"abilene_direction", [&] { return suite.abilene(); }},
      {"netflix_what_if", [&] { return suite.netflix(); }},
      {"traffic_identity", [&] { return suite.traffic_identity(); }},
      {"determinism", [&] { return suite.determinism(); }},
  };
  const std::set<std::string> expected(expect_fail.begin(), expect_fail.end());
  for (const std::string& id : expected) {
    if (std::none_of(criteria.begin(), criteria.end(), [&](const auto& c) { return c.first == id; })) {
      std::cerr << "unknown criterion " << id << "\n";
      return 2;
    }
  }

  int unexpected = 0;
  for (const auto& [id, run] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const bool known = expected.count(id) > 0;
    fmt::print("{} {}: {}{}\n", o.pass ? "PASS" : "FAIL", id, o.detail,
               known ? (o.pass ? " [expected to fail]" : " [expected failure]") : "");
    std::cout.flush();
    if (o.pass == known) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
