#include "cate/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "cate/error.hpp"

namespace cate {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool same_score(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

// Uniform in [0, 1) from the top 53 bits; stable across standard libraries.
double unit_uniform(std::mt19937_64& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

CandidateScore score_location(const LinkLoadState& state, const NetworkTopology& topo,
                              const RoutingMatrix& routing, NodeId location, NodeId consumer,
                              double volume, ObjectiveKind objective) {
  const PathProperties props = path_properties(routing, topo, location, consumer);
  const auto& links = routing.path(location, consumer);
  return {evaluate_candidate(state, props, links, volume, objective), props.hop_count,
          props.delay_ms, location};
}

NodeId nearest_location(const RoutingMatrix& routing, NodeId consumer,
                        std::span<const NodeId> locations) {
  NodeId best = locations.front();
  std::size_t best_hops = std::numeric_limits<std::size_t>::max();
  for (NodeId i : locations) {
    const std::size_t hops = routing.path(i, consumer).size();
    if (hops < best_hops || (hops == best_hops && i < best)) {
      best = i;
      best_hops = hops;
    }
  }
  return best;
}

// In-tree of the eligible paths towards one consumer. Routed paths to a
// fixed destination share suffixes, so every node on them has exactly one
// outgoing tree link.
class SubFlowTree {
 public:
  SubFlowTree(const NetworkTopology& topo, const RoutingMatrix& routing, NodeId consumer,
              std::span<const NodeId> locations)
      : topo_(topo), consumer_(consumer), next_(topo.node_count(), -1),
        source_(topo.node_count(), false), inflow_(topo.node_count(), 0.0) {
    std::vector<int> depth(topo.node_count(), -1);
    for (NodeId i : locations) {
      source_[i] = true;
      const auto& path = routing.path(i, consumer);
      for (std::size_t h = 0; h < path.size(); ++h) {
        const NodeId v = topo.link(path[h]).src;
        if (next_[v] < 0) {
          next_[v] = path[h];
          depth[v] = static_cast<int>(path.size() - h);
          order_.push_back(v);
        }
      }
    }
    std::sort(order_.begin(), order_.end(), [&](NodeId a, NodeId b) {
      return depth[a] != depth[b] ? depth[a] > depth[b] : a < b;
    });
  }

  /// Maximum volume deliverable to the consumer when link l may carry at
  /// most capacity(l) more.
  template <typename Capacity>
  double deliverable(Capacity&& capacity) {
    for (NodeId v : order_) inflow_[v] = 0.0;
    double total = 0.0;
    for (NodeId v : order_) {
      const double supply = source_[v] ? kInf : inflow_[v];
      const double out = std::min(std::max(0.0, capacity(next_[v])), supply);
      const NodeId head = topo_.link(next_[v]).dst;
      if (head == consumer_) {
        total += out;
      } else {
        inflow_[head] += out;
      }
    }
    return total;
  }

 private:
  const NetworkTopology& topo_;
  NodeId consumer_;
  std::vector<LinkId> next_;
  std::vector<bool> source_;
  std::vector<double> inflow_;
  std::vector<NodeId> order_;
};

std::vector<Placement> place_max_utilization(const LinkLoadState& state,
                                             const NetworkTopology& topo,
                                             const RoutingMatrix& routing, NodeId consumer,
                                             std::span<const NodeId> locations, double volume) {
  const Eigen::VectorXd& y = state.volumes();
  const Eigen::VectorXd& c = state.capacities();

  // Upper bound: everything on the single best path.
  double hi = kInf;
  for (NodeId i : locations) {
    double worst = 0.0;
    for (LinkId l : routing.path(i, consumer)) worst = std::max(worst, (y[l] + volume) / c[l]);
    hi = std::min(hi, worst);
  }
  double lo = 0.0;
  SubFlowTree tree(topo, routing, consumer, locations);
  const double need = volume * (1.0 - 1e-14);
  for (int step = 0; step < 200 && hi - lo > 1e-14 * std::max(hi, 1e-300); ++step) {
    const double mid = 0.5 * (lo + hi);
    const double reach = tree.deliverable([&](LinkId l) { return mid * c[l] - y[l]; });
    if (reach >= need) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  // Any placement whose paths stay at or below `hi` is optimal; shorter
  // paths are filled first up to that level.
  const double target = hi;

  std::vector<CandidateScore> order;
  for (NodeId i : locations) {
    const PathProperties props = path_properties(routing, topo, i, consumer);
    order.push_back({0.0, props.hop_count, props.delay_ms, i});
  }
  std::sort(order.begin(), order.end(), better);

  std::vector<double> added(static_cast<std::size_t>(y.size()), 0.0);
  std::vector<Placement> out;
  double remaining = volume;
  for (const CandidateScore& cand : order) {
    if (remaining <= 0.0) break;
    const auto& path = routing.path(cand.location, consumer);
    double room = kInf;
    for (LinkId l : path) room = std::min(room, target * c[l] - y[l] - added[l]);
    const double amount = std::min(remaining, std::max(0.0, room));
    if (amount <= 0.0) continue;
    for (LinkId l : path) added[l] += amount;
    out.push_back({cand.location, amount});
    remaining -= amount;
  }
  if (remaining > 0.0) {
    // Bisection slack only; never more than ~1e-14 of the volume.
    if (out.empty()) {
      out.push_back({order.front().location, remaining});
    } else {
      out.back().volume += remaining;
    }
  }
  std::sort(out.begin(), out.end(),
            [](const Placement& a, const Placement& b) { return a.location < b.location; });
  return out;
}

bool placements_differ(const std::vector<Placement>& a, const std::vector<Placement>& b,
                       double tolerance) {
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].location < b[j].location)) {
      if (a[i].volume > tolerance) return true;
      ++i;
    } else if (i == a.size() || b[j].location < a[i].location) {
      if (b[j].volume > tolerance) return true;
      ++j;
    } else {
      if (std::abs(a[i].volume - b[j].volume) > tolerance) return true;
      ++i;
      ++j;
    }
  }
  return false;
}

void interleave(std::vector<std::vector<Request>>& per_demand, std::vector<Request>& out) {
  std::size_t longest = 0;
  for (const auto& list : per_demand) longest = std::max(longest, list.size());
  for (std::size_t t = 0; t < longest; ++t) {
    for (const auto& list : per_demand) {
      if (t < list.size()) {
        Request r = list[t];
        r.arrival = out.size();
        out.push_back(r);
      }
    }
  }
}

void shuffle_requests(std::vector<Request>& requests, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  for (std::size_t i = requests.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(unit_uniform(engine) * static_cast<double>(i));
    std::swap(requests[i - 1], requests[std::min(j, i - 1)]);
  }
  for (std::size_t i = 0; i < requests.size(); ++i) requests[i].arrival = i;
}

}  // namespace

std::string_view to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::kMaxLinkUtilization: return "max-link-utilization";
    case ObjectiveKind::kPathLength: return "path-length";
    case ObjectiveKind::kPathDelay: return "path-delay";
  }
  return "unknown";
}

ObjectiveKind parse_objective(std::string_view name) {
  if (name == "max-link-utilization") return ObjectiveKind::kMaxLinkUtilization;
  if (name == "path-length") return ObjectiveKind::kPathLength;
  if (name == "path-delay") return ObjectiveKind::kPathDelay;
  throw Error(ErrorKind::kConfig, fmt::format("unknown objective \"{}\"", name));
}

bool better(const CandidateScore& a, const CandidateScore& b) {
  if (!same_score(a.score, b.score)) return a.score < b.score;
  if (a.hops != b.hops) return a.hops < b.hops;
  if (!same_score(a.delay_ms, b.delay_ms)) return a.delay_ms < b.delay_ms;
  return a.location < b.location;
}

LinkLoadState::LinkLoadState(const NetworkTopology& topo)
    : capacity_(topo.capacities()), volume_(Eigen::VectorXd::Zero(topo.capacities().size())) {}

LinkLoadState::LinkLoadState(Eigen::VectorXd capacity, Eigen::VectorXd volume)
    : capacity_(std::move(capacity)), volume_(std::move(volume)) {
  if (capacity_.size() != volume_.size()) {
    throw Error(ErrorKind::kInvalidInput, "link state: capacity and volume sizes differ");
  }
}

void LinkLoadState::add_path(std::span<const LinkId> links, double volume) {
  for (LinkId l : links) volume_[l] += volume;
}

double LinkLoadState::max_utilization() const {
  if (volume_.size() == 0) return 0.0;
  return volume_.cwiseQuotient(capacity_).maxCoeff();
}

bool LinkLoadState::matches(const LinkLoadState& other, double tolerance) const {
  if (other.volume_.size() != volume_.size()) return false;
  for (Eigen::Index l = 0; l < volume_.size(); ++l) {
    if (std::abs(volume_[l] - other.volume_[l]) > tolerance * std::max(1.0, std::abs(volume_[l]))) {
      return false;
    }
  }
  return true;
}

double evaluate_candidate(const LinkLoadState& state, const PathProperties& path,
                          std::span<const LinkId> links, double volume, ObjectiveKind objective) {
  if (links.empty()) return 0.0;
  switch (objective) {
    case ObjectiveKind::kMaxLinkUtilization: {
      double worst = 0.0;
      for (LinkId l : links) {
        worst = std::max(worst, (state.volume(l) + volume) / state.capacity(l));
      }
      return worst;
    }
    case ObjectiveKind::kPathLength:
      return static_cast<double>(path.hop_count);
    case ObjectiveKind::kPathDelay:
      return path.delay_ms;
  }
  return 0.0;
}

double SubFlowAssignment::volume() const {
  double sum = 0.0;
  for (const Placement& p : placements) sum += p.volume;
  return sum;
}

double SubFlowAssignment::volume_at(NodeId location) const {
  for (const Placement& p : placements) {
    if (p.location == location) return p.volume;
  }
  return 0.0;
}

void FlowAssignment::add(NodeId location, NodeId consumer, ProviderId provider, double volume,
                         bool adjustable) {
  auto it = std::find_if(flows_.begin(), flows_.end(), [&](const SubFlowAssignment& f) {
    return f.consumer == consumer && f.provider == provider;
  });
  if (it == flows_.end()) {
    flows_.push_back({consumer, provider, adjustable, {}});
    it = std::prev(flows_.end());
  }
  auto p = std::lower_bound(it->placements.begin(), it->placements.end(), location,
                            [](const Placement& a, NodeId v) { return a.location < v; });
  if (p != it->placements.end() && p->location == location) {
    p->volume += volume;
  } else {
    it->placements.insert(p, {location, volume});
  }
}

void FlowAssignment::append(const FlowAssignment& other) {
  for (const SubFlowAssignment& f : other.flows_) {
    for (const Placement& p : f.placements) add(p.location, f.consumer, f.provider, p.volume, f.adjustable);
  }
  background_.insert(background_.end(), other.background_.begin(), other.background_.end());
}

void FlowAssignment::canonicalize() {
  for (SubFlowAssignment& f : flows_) {
    std::erase_if(f.placements, [](const Placement& p) { return !(p.volume > 0.0); });
    std::sort(f.placements.begin(), f.placements.end(),
              [](const Placement& a, const Placement& b) { return a.location < b.location; });
  }
  std::sort(flows_.begin(), flows_.end(), [](const SubFlowAssignment& a, const SubFlowAssignment& b) {
    return std::tie(a.provider, a.consumer) < std::tie(b.provider, b.consumer);
  });
  std::sort(background_.begin(), background_.end(),
            [](const BackgroundDemand& a, const BackgroundDemand& b) {
              return std::tie(a.origin, a.destination) < std::tie(b.origin, b.destination);
            });
}

const SubFlowAssignment* FlowAssignment::find(NodeId consumer, ProviderId provider) const {
  for (const SubFlowAssignment& f : flows_) {
    if (f.consumer == consumer && f.provider == provider) return &f;
  }
  return nullptr;
}

Eigen::VectorXd FlowAssignment::od_volumes(const RoutingMatrix& routing) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(routing.od_count()));
  for (const SubFlowAssignment& f : flows_) {
    for (const Placement& p : f.placements) {
      x[static_cast<Eigen::Index>(routing.od_index(p.location, f.consumer))] += p.volume;
    }
  }
  for (const BackgroundDemand& b : background_) {
    x[static_cast<Eigen::Index>(routing.od_index(b.origin, b.destination))] += b.volume;
  }
  return x;
}

LinkLoadState recompute_state(const FlowAssignment& assignment, const NetworkTopology& topo,
                              const RoutingMatrix& routing) {
  return LinkLoadState(topo.capacities(), routing.link_loads(assignment.od_volumes(routing)));
}

std::optional<std::string> find_violation(const FlowAssignment& assignment,
                                          std::span<const SubFlowDemand> demands,
                                          double tolerance) {
  for (const SubFlowDemand& d : demands) {
    const SubFlowAssignment* f = assignment.find(d.consumer, d.provider);
    const double assigned = f ? f->volume() : 0.0;
    if (std::abs(assigned - d.volume) > tolerance * std::max(1.0, d.volume)) {
      return fmt::format("demand (consumer {}, provider {}) assigned {} of {}", d.consumer,
                         d.provider, assigned, d.volume);
    }
    if (f == nullptr) continue;
    for (const Placement& p : f->placements) {
      if (p.volume < -tolerance) {
        return fmt::format("negative volume at location {} for (consumer {}, provider {})",
                           p.location, d.consumer, d.provider);
      }
      if (p.volume > 0.0 &&
          !std::binary_search(d.locations.begin(), d.locations.end(), p.location)) {
        return fmt::format("location {} is not eligible for (consumer {}, provider {})",
                           p.location, d.consumer, d.provider);
      }
    }
  }
  return std::nullopt;
}

std::vector<Request> make_requests(std::span<const SubFlowDemand> demands, std::size_t quanta,
                                   std::optional<std::uint64_t> shuffle_seed) {
  if (quanta == 0) throw Error(ErrorKind::kInvalidInput, "quantum count must be >= 1");
  std::vector<std::vector<Request>> per_demand;
  for (const SubFlowDemand& d : demands) {
    if (!(d.volume > 0.0)) continue;
    const double q = d.volume / static_cast<double>(quanta);
    per_demand.emplace_back(quanta, Request{d.consumer, d.provider, q, 0});
  }
  std::vector<Request> out;
  interleave(per_demand, out);
  if (shuffle_seed) shuffle_requests(out, *shuffle_seed);
  return out;
}

std::vector<Request> make_quantum_requests(std::span<const SubFlowDemand> demands, double quantum,
                                           std::optional<std::uint64_t> shuffle_seed) {
  if (!(quantum > 0.0)) throw Error(ErrorKind::kInvalidInput, "quantum must be > 0");
  std::vector<std::vector<Request>> per_demand;
  for (const SubFlowDemand& d : demands) {
    if (!(d.volume > 0.0)) continue;
    std::vector<Request> list;
    double left = d.volume;
    while (left > quantum * (1.0 + 1e-12)) {
      list.push_back({d.consumer, d.provider, quantum, 0});
      left -= quantum;
    }
    list.push_back({d.consumer, d.provider, left, 0});
    per_demand.push_back(std::move(list));
  }
  std::vector<Request> out;
  interleave(per_demand, out);
  if (shuffle_seed) shuffle_requests(out, *shuffle_seed);
  return out;
}

EligibleSets::EligibleSets(std::span<const SubFlowDemand> demands) {
  for (const SubFlowDemand& d : demands) set(d.consumer, d.provider, d.locations);
}

void EligibleSets::set(NodeId consumer, ProviderId provider, std::vector<NodeId> locations) {
  sets_[{consumer, provider}] = std::move(locations);
}

const std::vector<NodeId>& EligibleSets::at(NodeId consumer, ProviderId provider) const {
  static const std::vector<NodeId> kEmpty;
  auto it = sets_.find({consumer, provider});
  return it == sets_.end() ? kEmpty : it->second;
}

AssignmentResult online_greedy_assign(std::span<const Request> requests,
                                      const NetworkTopology& topo, const RoutingMatrix& routing,
                                      const EligibleSets& eligible, LinkLoadState initial,
                                      ObjectiveKind objective) {
  AssignmentResult result{FlowAssignment{}, std::move(initial)};
  for (const Request& r : requests) {
    if (!(r.volume > 0.0)) throw Error(ErrorKind::kInvalidInput, "request quantum must be > 0");
    const std::vector<NodeId>& locations = eligible.at(r.consumer, r.provider);
    if (locations.empty()) {
      throw Error(ErrorKind::kInvalidInput,
                  fmt::format("request {} (consumer {}, provider {}): empty eligible set",
                              r.arrival, r.consumer, r.provider));
    }
    CandidateScore best{kInf, 0, 0.0, -1};
    for (NodeId i : locations) {
      CandidateScore cand = score_location(result.state, topo, routing, i, r.consumer, r.volume,
                                           objective);
      if (best.location < 0 || better(cand, best)) best = cand;
    }
    result.state.add_path(routing.path(best.location, r.consumer), r.volume);
    result.assignment.add(best.location, r.consumer, r.provider, r.volume, true);
  }
  result.assignment.canonicalize();
  return result;
}

double objective_value(const FlowAssignment& assignment, const LinkLoadState& state,
                       const NetworkTopology& topo, const RoutingMatrix& routing,
                       ObjectiveKind objective) {
  if (objective == ObjectiveKind::kMaxLinkUtilization) return state.max_utilization();
  long double sum = 0.0L;
  for (const SubFlowAssignment& f : assignment.flows()) {
    if (!f.adjustable) continue;
    for (const Placement& p : f.placements) {
      const PathProperties props = path_properties(routing, topo, p.location, f.consumer);
      const double unit = objective == ObjectiveKind::kPathLength
                              ? static_cast<double>(props.hop_count)
                              : props.delay_ms;
      sum += static_cast<long double>(p.volume) * unit;
    }
  }
  return static_cast<double>(sum);
}

std::vector<Placement> reassign_subflow(const LinkLoadState& state, const NetworkTopology& topo,
                                        const RoutingMatrix& routing, NodeId consumer,
                                        std::span<const NodeId> locations, double volume,
                                        ObjectiveKind objective) {
  if (locations.empty()) {
    throw Error(ErrorKind::kInvalidInput,
                fmt::format("consumer {}: empty eligible set", consumer));
  }
  if (!(volume > 0.0)) return {};
  // A co-located server adds no load anywhere and wins under every objective.
  if (std::find(locations.begin(), locations.end(), consumer) != locations.end()) {
    return {{consumer, volume}};
  }
  if (objective == ObjectiveKind::kMaxLinkUtilization) {
    return place_max_utilization(state, topo, routing, consumer, locations, volume);
  }
  CandidateScore best{kInf, 0, 0.0, -1};
  for (NodeId i : locations) {
    CandidateScore cand = score_location(state, topo, routing, i, consumer, volume, objective);
    if (best.location < 0 || better(cand, best)) best = cand;
  }
  return {{best.location, volume}};
}

GreedySortFlowResult greedy_sort_flow(const BinProblem& problem, const FlowAssignment& initial,
                                      const NetworkTopology& topo, const RoutingMatrix& routing,
                                      ObjectiveKind objective,
                                      const GreedySortFlowOptions& options) {
  if (options.max_iterations < 1) {
    throw Error(ErrorKind::kInvalidInput, "max_iterations must be >= 1");
  }
  const auto& demands = problem.adjustable;
  for (const SubFlowDemand& d : demands) {
    if (d.volume > 0.0 && d.locations.empty()) {
      throw Error(ErrorKind::kInvalidInput,
                  fmt::format("demand (consumer {}, provider {}): empty eligible set", d.consumer,
                              d.provider));
    }
  }

  // Providers by decreasing volume, then consumers by decreasing volume.
  std::map<ProviderId, double> provider_volume;
  for (const SubFlowDemand& d : demands) provider_volume[d.provider] += d.volume;
  std::vector<std::size_t> order(demands.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const SubFlowDemand& x = demands[a];
    const SubFlowDemand& y = demands[b];
    const double vx = provider_volume[x.provider];
    const double vy = provider_volume[y.provider];
    if (vx != vy) return vx > vy;
    if (x.provider != y.provider) return x.provider < y.provider;
    if (x.volume != y.volume) return x.volume > y.volume;
    return x.consumer < y.consumer;
  });

  std::vector<std::vector<Placement>> current(demands.size());
  for (std::size_t s = 0; s < demands.size(); ++s) {
    const SubFlowDemand& d = demands[s];
    if (!(d.volume > 0.0)) continue;
    const SubFlowAssignment* seed = initial.find(d.consumer, d.provider);
    bool usable = seed != nullptr && seed->volume() > 0.0;
    if (usable) {
      for (const Placement& p : seed->placements) {
        if (!std::binary_search(d.locations.begin(), d.locations.end(), p.location)) usable = false;
      }
    }
    if (usable) {
      // Rescale so a seed from another bin still satisfies this demand.
      const double scale = d.volume / seed->volume();
      for (const Placement& p : seed->placements) current[s].push_back({p.location, p.volume * scale});
    } else {
      current[s].push_back({nearest_location(routing, d.consumer, d.locations), d.volume});
    }
  }

  const LinkLoadState fixed_state = recompute_state(problem.fixed, topo, routing);
  auto assemble = [&]() {
    FlowAssignment out = problem.fixed;
    for (std::size_t s = 0; s < demands.size(); ++s) {
      for (const Placement& p : current[s]) {
        out.add(p.location, demands[s].consumer, demands[s].provider, p.volume, true);
      }
    }
    out.canonicalize();
    return out;
  };
  auto rebuild_state = [&]() {
    LinkLoadState state = fixed_state;
    for (std::size_t s = 0; s < demands.size(); ++s) {
      for (const Placement& p : current[s]) {
        state.add_path(routing.path(p.location, demands[s].consumer), p.volume);
      }
    }
    return state;
  };

  GreedySortFlowResult result{assemble(), rebuild_state(), 0, false, {}};
  result.objective_history.push_back(
      objective_value(result.assignment, result.state, topo, routing, objective));

  LinkLoadState state = result.state;
  for (int pass = 1; pass <= options.max_iterations; ++pass) {
    bool moved = false;
    for (std::size_t s : order) {
      const SubFlowDemand& d = demands[s];
      if (!(d.volume > 0.0)) continue;
      for (const Placement& p : current[s]) state.add_path(routing.path(p.location, d.consumer), -p.volume);
      std::vector<Placement> next =
          reassign_subflow(state, topo, routing, d.consumer, d.locations, d.volume, objective);
      if (placements_differ(next, current[s], 1e-9 * d.volume)) moved = true;
      for (const Placement& p : next) state.add_path(routing.path(p.location, d.consumer), p.volume);
      current[s] = std::move(next);
    }
    // Drop the drift of incremental subtraction.
    state = rebuild_state();
    result.iterations_used = pass;
    result.assignment = assemble();
    result.state = state;
    result.objective_history.push_back(
        objective_value(result.assignment, result.state, topo, routing, objective));
    if (!moved) {
      result.converged = true;
      break;
    }
  }
  return result;
}

std::string_view to_string(BaselinePolicy policy) {
  return policy == BaselinePolicy::kNearest ? "nearest" : "random";
}

BaselinePolicy parse_baseline(std::string_view name) {
  if (name == "nearest") return BaselinePolicy::kNearest;
  if (name == "random") return BaselinePolicy::kRandom;
  throw Error(ErrorKind::kConfig, fmt::format("unknown baseline policy \"{}\"", name));
}

FlowAssignment baseline_place(std::span<const SubFlowDemand> demands, bool adjustable,
                              std::size_t bin, const RoutingMatrix& routing,
                              const BaselineOptions& options) {
  FlowAssignment out;
  for (const SubFlowDemand& d : demands) {
    if (!(d.volume > 0.0)) continue;
    if (d.locations.empty()) {
      throw Error(ErrorKind::kInvalidInput,
                  fmt::format("demand (consumer {}, provider {}): empty eligible set", d.consumer,
                              d.provider));
    }
    if (options.policy == BaselinePolicy::kNearest || d.locations.size() == 1) {
      out.add(nearest_location(routing, d.consumer, d.locations), d.consumer, d.provider,
              d.volume, adjustable);
      continue;
    }
    std::seed_seq seq{static_cast<std::uint32_t>(options.seed),
                      static_cast<std::uint32_t>(options.seed >> 32),
                      static_cast<std::uint32_t>(bin), static_cast<std::uint32_t>(d.provider),
                      static_cast<std::uint32_t>(d.consumer)};
    std::mt19937_64 engine(seq);
    std::vector<double> weights(d.locations.size());
    double sum = 0.0;
    for (double& w : weights) {
      w = unit_uniform(engine);
      sum += w;
    }
    if (!(sum > 0.0)) {
      std::fill(weights.begin(), weights.end(), 1.0);
      sum = static_cast<double>(weights.size());
    }
    double assigned = 0.0;
    for (std::size_t i = 0; i + 1 < d.locations.size(); ++i) {
      const double v = d.volume * weights[i] / sum;
      assigned += v;
      out.add(d.locations[i], d.consumer, d.provider, v, adjustable);
    }
    out.add(d.locations.back(), d.consumer, d.provider, d.volume - assigned, adjustable);
  }
  out.canonicalize();
  return out;
}

BinProblem make_bin_problem(const BinSplit& split, const RoutingMatrix& routing,
                            const BaselineOptions& options) {
  BinProblem problem{split.adjustable,
                     baseline_place(split.fixed_content, false, split.bin, routing, options)};
  problem.fixed.background() = split.background;
  problem.fixed.canonicalize();
  return problem;
}

AssignmentResult baseline_assign(const BinSplit& split, const NetworkTopology& topo,
                                 const RoutingMatrix& routing, const BaselineOptions& options) {
  FlowAssignment assignment =
      baseline_place(split.adjustable, true, split.bin, routing, options);
  assignment.append(baseline_place(split.fixed_content, false, split.bin, routing, options));
  assignment.background() = split.background;
  assignment.canonicalize();
  LinkLoadState state = recompute_state(assignment, topo, routing);
  return {std::move(assignment), std::move(state)};
}

void write_assignment_csv(std::ostream& out,
                          std::span<const std::pair<std::size_t, FlowAssignment>> bins) {
  out << "bin,provider,consumer,location,volume\n";
  std::vector<std::size_t> order(bins.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return bins[a].first < bins[b].first; });
  for (std::size_t idx : order) {
    FlowAssignment sorted = bins[idx].second;
    sorted.canonicalize();
    for (const SubFlowAssignment& f : sorted.flows()) {
      for (const Placement& p : f.placements) {
        fmt::print(out, "{},{},{},{},{}\n", bins[idx].first, f.provider, f.consumer, p.location,
                   p.volume);
      }
    }
  }
}

}  // namespace cate
