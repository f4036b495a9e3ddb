#ifndef CATE_TOPOLOGY_HPP_
#define CATE_TOPOLOGY_HPP_

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstddef>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cate {

using NodeId = int;
using LinkId = int;

struct Node {
  NodeId id = 0;
  std::string label;
  bool is_peering_point = false;
};

/// Directed link. Capacity is in volume units per bin, delay in ms.
struct Link {
  NodeId src = 0;
  NodeId dst = 0;
  double capacity = 1.0;
  double weight = 1.0;
  double delay_ms = 0.0;
};

/// Immutable capacitated directed graph. Construction validates every
/// invariant (contiguous ids, endpoints, positive capacities, strong
/// connectivity) and throws cate::Error otherwise.
class NetworkTopology {
 public:
  NetworkTopology(std::vector<Node> nodes, std::vector<Link> links);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t link_count() const { return links_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }
  const Link& link(LinkId id) const { return links_.at(static_cast<std::size_t>(id)); }
  const Eigen::VectorXd& capacities() const { return capacities_; }

  bool has_node(NodeId id) const {
    return id >= 0 && static_cast<std::size_t>(id) < nodes_.size();
  }
  std::optional<LinkId> find_link(NodeId src, NodeId dst) const;
  std::vector<NodeId> peering_points() const;

  /// Outgoing link ids of `node`, sorted by destination id.
  const std::vector<LinkId>& out_links(NodeId node) const { return out_[node]; }
  const std::vector<LinkId>& in_links(NodeId node) const { return in_[node]; }

  friend bool operator==(const NetworkTopology& a, const NetworkTopology& b);

 private:
  std::vector<Node> nodes_;
  std::vector<Link> links_;
  Eigen::VectorXd capacities_;
  std::vector<std::vector<LinkId>> out_;
  std::vector<std::vector<LinkId>> in_;
};

/// Parses the JSON topology document ("nodes", "links", optional
/// "symmetric"). Missing weight defaults to 1, missing delay_ms to 0.
NetworkTopology load_topology(std::string_view document);
NetworkTopology load_topology_file(const std::filesystem::path& path);

/// Single-path routing table plus the boolean incidence matrix A
/// (links x OD pairs), so that link loads are y = A x.
class RoutingMatrix {
 public:
  RoutingMatrix(std::size_t node_count, std::size_t link_count,
                std::vector<std::vector<LinkId>> paths);

  std::size_t node_count() const { return node_count_; }
  std::size_t link_count() const { return link_count_; }
  std::size_t od_count() const { return paths_.size(); }

  /// Column index of OD pair (o, d) in the incidence matrix.
  std::size_t od_index(NodeId origin, NodeId destination) const;

  /// Ordered links from origin to destination. Throws kUnknownId.
  const std::vector<LinkId>& path(NodeId origin, NodeId destination) const;

  bool traverses(std::size_t od, LinkId link) const {
    return incidence_.coeff(link, static_cast<Eigen::Index>(od)) != 0.0;
  }

  const Eigen::SparseMatrix<double>& incidence() const { return incidence_; }

  /// y = A x for an OD volume vector indexed by od_index.
  Eigen::VectorXd link_loads(const Eigen::VectorXd& od_volumes) const {
    return incidence_ * od_volumes;
  }

  friend bool operator==(const RoutingMatrix& a, const RoutingMatrix& b);

 private:
  std::size_t node_count_;
  std::size_t link_count_;
  std::vector<std::vector<LinkId>> paths_;
  Eigen::SparseMatrix<double> incidence_;
};

/// Shortest paths by (weight, hops), remaining ties broken by the
/// lexicographically smallest node sequence.
RoutingMatrix compute_routing(const NetworkTopology& topo);

struct PathProperties {
  NodeId origin = 0;
  NodeId destination = 0;
  int hop_count = 0;
  double delay_ms = 0.0;
  double bottleneck_capacity = std::numeric_limits<double>::infinity();
};

PathProperties path_properties(const RoutingMatrix& routing, const NetworkTopology& topo,
                               NodeId origin, NodeId destination);

const std::vector<LinkId>& links_on_path(const RoutingMatrix& routing, NodeId origin,
                                         NodeId destination);

/// Node sequence of the routed path, origin first.
std::vector<NodeId> path_nodes(const RoutingMatrix& routing, const NetworkTopology& topo,
                               NodeId origin, NodeId destination);

}  // namespace cate

#endif  // CATE_TOPOLOGY_HPP_
