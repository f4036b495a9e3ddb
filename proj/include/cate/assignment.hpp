#ifndef CATE_ASSIGNMENT_HPP_
#define CATE_ASSIGNMENT_HPP_

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cate/demand.hpp"
#include "cate/topology.hpp"

namespace cate {

enum class ObjectiveKind { kMaxLinkUtilization, kPathLength, kPathDelay };

std::string_view to_string(ObjectiveKind kind);
ObjectiveKind parse_objective(std::string_view name);

/// A candidate location for a sub-flow, ordered by score and then by the
/// fixed tie-break chain: fewer hops, lower delay, lower node id.
struct CandidateScore {
  double score = 0.0;
  int hops = 0;
  double delay_ms = 0.0;
  NodeId location = 0;
};

/// Strict "a is preferred over b". Scores within 1e-12 (relative) tie.
bool better(const CandidateScore& a, const CandidateScore& b);

/// Per-link carried volume y and its utilization y / capacity.
class LinkLoadState {
 public:
  explicit LinkLoadState(const NetworkTopology& topo);
  LinkLoadState(Eigen::VectorXd capacity, Eigen::VectorXd volume);

  void add_path(std::span<const LinkId> links, double volume);

  std::size_t link_count() const { return static_cast<std::size_t>(volume_.size()); }
  double volume(LinkId link) const { return volume_[link]; }
  double capacity(LinkId link) const { return capacity_[link]; }
  double utilization(LinkId link) const { return volume_[link] / capacity_[link]; }
  const Eigen::VectorXd& volumes() const { return volume_; }
  const Eigen::VectorXd& capacities() const { return capacity_; }
  Eigen::VectorXd utilizations() const { return volume_.cwiseQuotient(capacity_); }
  double max_utilization() const;

  /// Per-link |a - b| <= tolerance * max(1, |a|).
  bool matches(const LinkLoadState& other, double tolerance = 1e-9) const;

 private:
  Eigen::VectorXd capacity_;
  Eigen::VectorXd volume_;
};

/// Score of sending `volume` over `links` (lower is better):
/// max-link-utilization -> highest post-assignment utilization on the path,
/// path-length -> hop count, path-delay -> delay. Empty paths score 0.
double evaluate_candidate(const LinkLoadState& state, const PathProperties& path,
                          std::span<const LinkId> links, double volume, ObjectiveKind objective);

struct Placement {
  NodeId location = 0;
  double volume = 0.0;
};

/// f_ijk for one (consumer j, provider k), one entry per location i.
struct SubFlowAssignment {
  NodeId consumer = 0;
  ProviderId provider = 0;
  bool adjustable = false;
  std::vector<Placement> placements;  // sorted by location, volumes > 0

  double volume() const;
  double volume_at(NodeId location) const;
};

/// All traffic of one bin: content sub-flows plus background OD demand.
class FlowAssignment {
 public:
  std::vector<SubFlowAssignment>& flows() { return flows_; }
  const std::vector<SubFlowAssignment>& flows() const { return flows_; }
  std::vector<BackgroundDemand>& background() { return background_; }
  const std::vector<BackgroundDemand>& background() const { return background_; }

  /// Adds volume for (location, consumer, provider); merges with any
  /// existing entry.
  void add(NodeId location, NodeId consumer, ProviderId provider, double volume, bool adjustable);
  void append(const FlowAssignment& other);
  /// Sorts flows by (provider, consumer) and drops empty placements.
  void canonicalize();

  const SubFlowAssignment* find(NodeId consumer, ProviderId provider) const;

  /// f_ij aggregated over providers and background, indexed by od_index.
  Eigen::VectorXd od_volumes(const RoutingMatrix& routing) const;

 private:
  std::vector<SubFlowAssignment> flows_;
  std::vector<BackgroundDemand> background_;
};

/// Loads recomputed from scratch as y = A x.
LinkLoadState recompute_state(const FlowAssignment& assignment, const NetworkTopology& topo,
                              const RoutingMatrix& routing);

/// First violated demand-satisfaction or restriction constraint, if any.
std::optional<std::string> find_violation(const FlowAssignment& assignment,
                                          std::span<const SubFlowDemand> demands,
                                          double tolerance = 1e-9);

struct Request {
  NodeId consumer = 0;
  ProviderId provider = 0;
  double volume = 0.0;
  std::size_t arrival = 0;
};

/// Splits every demand into `quanta` equal requests, interleaved round-robin
/// by arrival index; an optional seed shuffles the stream.
std::vector<Request> make_requests(std::span<const SubFlowDemand> demands, std::size_t quanta,
                                   std::optional<std::uint64_t> shuffle_seed = std::nullopt);
/// Requests of fixed size `quantum` (the last one per demand takes the
/// remainder), interleaved round-robin.
std::vector<Request> make_quantum_requests(std::span<const SubFlowDemand> demands, double quantum,
                                           std::optional<std::uint64_t> shuffle_seed = std::nullopt);

/// Eligible sets M_jk keyed by (consumer, provider).
class EligibleSets {
 public:
  EligibleSets() = default;
  explicit EligibleSets(std::span<const SubFlowDemand> demands);

  void set(NodeId consumer, ProviderId provider, std::vector<NodeId> locations);
  const std::vector<NodeId>& at(NodeId consumer, ProviderId provider) const;

 private:
  std::map<std::pair<NodeId, ProviderId>, std::vector<NodeId>> sets_;
};

struct AssignmentResult {
  FlowAssignment assignment;
  LinkLoadState state;
};

/// Online greedy server selection: every request goes to the eligible
/// location that optimizes the objective given the loads at its arrival.
/// The returned assignment holds the request placements only; the state
/// starts from `initial`.
AssignmentResult online_greedy_assign(std::span<const Request> requests,
                                      const NetworkTopology& topo, const RoutingMatrix& routing,
                                      const EligibleSets& eligible, LinkLoadState initial,
                                      ObjectiveKind objective);

/// x_r to re-assign plus x_s already placed (fixed content and background).
struct BinProblem {
  std::vector<SubFlowDemand> adjustable;
  FlowAssignment fixed;
};

struct GreedySortFlowOptions {
  int max_iterations = 10;
};

struct GreedySortFlowResult {
  FlowAssignment assignment;  // fixed + adjustable
  LinkLoadState state;
  int iterations_used = 0;
  bool converged = false;
  /// Objective value before the first pass, then after every pass.
  std::vector<double> objective_history;
};

/// Objective value of a full assignment: L for max-link-utilization,
/// sum of volume * hops (or * delay) over adjustable flows otherwise.
double objective_value(const FlowAssignment& assignment, const LinkLoadState& state,
                       const NetworkTopology& topo, const RoutingMatrix& routing,
                       ObjectiveKind objective);

/// Iterative Greedy-Sort-Flow. Providers are visited by decreasing volume,
/// consumers within a provider by decreasing volume; every sub-flow is
/// re-assigned against the residual loads until a pass moves nothing or
/// `max_iterations` passes ran. `initial` seeds the adjustable placements;
/// sub-flows missing from it start at their nearest location.
GreedySortFlowResult greedy_sort_flow(const BinProblem& problem, const FlowAssignment& initial,
                                      const NetworkTopology& topo, const RoutingMatrix& routing,
                                      ObjectiveKind objective,
                                      const GreedySortFlowOptions& options = {});

/// Re-places one sub-flow of `volume` for `consumer` over `locations`
/// against residual `state` (which must not contain the sub-flow). Exposed
/// for tests of the single-sub-flow subproblem.
///
/// max-link-utilization: water-filling to the smallest level t* at which the
/// eligible paths can carry the volume, filling paths in (hops, delay, id)
/// order up to t*. Other objectives: the whole volume on the best path.
std::vector<Placement> reassign_subflow(const LinkLoadState& state, const NetworkTopology& topo,
                                        const RoutingMatrix& routing, NodeId consumer,
                                        std::span<const NodeId> locations, double volume,
                                        ObjectiveKind objective);

enum class BaselinePolicy { kNearest, kRandom };

std::string_view to_string(BaselinePolicy policy);
BaselinePolicy parse_baseline(std::string_view name);

struct BaselineOptions {
  BaselinePolicy policy = BaselinePolicy::kNearest;
  std::uint64_t seed = 0;
};

/// Places demands without CaTE. Random weights are drawn per
/// (seed, bin, provider, consumer), so a demand's placement does not depend
/// on which other demands are placed alongside it.
FlowAssignment baseline_place(std::span<const SubFlowDemand> demands, bool adjustable,
                              std::size_t bin, const RoutingMatrix& routing,
                              const BaselineOptions& options);

/// x_r of the split plus x_s placed by the baseline policy (fixed content)
/// and the background OD demand.
BinProblem make_bin_problem(const BinSplit& split, const RoutingMatrix& routing,
                            const BaselineOptions& options);

AssignmentResult baseline_assign(const BinSplit& split, const NetworkTopology& topo,
                                 const RoutingMatrix& routing, const BaselineOptions& options);

/// CSV dump with columns bin,provider,consumer,location,volume in
/// (bin, provider, consumer, location) order.
void write_assignment_csv(std::ostream& out,
                          std::span<const std::pair<std::size_t, FlowAssignment>> bins);

}  // namespace cate

#endif  // CATE_ASSIGNMENT_HPP_
