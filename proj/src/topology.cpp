#include "cate/topology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>
#include <tuple>
#include <utility>

#include <fmt/format.h>
#include <json.hpp>

#include "cate/error.hpp"

namespace cate {

namespace {

using nlohmann::json;

bool reaches_all(const std::vector<std::vector<LinkId>>& adjacency,
                 const std::vector<Link>& links, bool forward) {
  const std::size_t n = adjacency.size();
  if (n == 0) return true;
  std::vector<bool> seen(n, false);
  std::vector<NodeId> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    for (LinkId l : adjacency[v]) {
      NodeId next = forward ? links[l].dst : links[l].src;
      if (!seen[next]) {
        seen[next] = true;
        stack.push_back(next);
      }
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

bool same_weight(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

struct Distance {
  double weight = std::numeric_limits<double>::infinity();
  int hops = std::numeric_limits<int>::max();
};

bool shorter(const Distance& a, const Distance& b) {
  if (same_weight(a.weight, b.weight)) return a.hops < b.hops;
  return a.weight < b.weight;
}

// Distances from every node to `destination` over the reversed graph.
std::vector<Distance> distances_to(const NetworkTopology& topo, NodeId destination) {
  std::vector<Distance> dist(topo.node_count());
  using Entry = std::tuple<double, int, NodeId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  dist[destination] = {0.0, 0};
  queue.emplace(0.0, 0, destination);
  std::vector<bool> done(topo.node_count(), false);
  while (!queue.empty()) {
    auto [w, h, v] = queue.top();
    queue.pop();
    if (done[v]) continue;
    done[v] = true;
    for (LinkId l : topo.in_links(v)) {
      const Link& link = topo.link(l);
      Distance candidate{dist[v].weight + link.weight, dist[v].hops + 1};
      if (!done[link.src] && shorter(candidate, dist[link.src])) {
        dist[link.src] = candidate;
        queue.emplace(candidate.weight, candidate.hops, link.src);
      }
    }
  }
  return dist;
}

double number_field(const json& record, const char* key, double fallback, bool required,
                    const std::string& where) {
  auto it = record.find(key);
  if (it == record.end()) {
    if (required) {
      throw Error(ErrorKind::kMalformed, fmt::format("{}: missing field \"{}\"", where, key));
    }
    return fallback;
  }
  if (!it->is_number()) {
    throw Error(ErrorKind::kMalformed, fmt::format("{}: field \"{}\" must be a number", where, key));
  }
  return it->get<double>();
}

int int_field(const json& record, const char* key, const std::string& where) {
  auto it = record.find(key);
  if (it == record.end() || !it->is_number_integer()) {
    throw Error(ErrorKind::kMalformed,
                fmt::format("{}: field \"{}\" must be an integer", where, key));
  }
  return it->get<int>();
}

}  // namespace

NetworkTopology::NetworkTopology(std::vector<Node> nodes, std::vector<Link> links)
    : nodes_(std::move(nodes)), links_(std::move(links)) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id != static_cast<NodeId>(i)) {
      throw Error(ErrorKind::kInvalidInput,
                  fmt::format("node record {}: ids must be unique and contiguous from 0 "
                              "(found id {})", i, nodes_[i].id));
    }
  }
  out_.assign(nodes_.size(), {});
  in_.assign(nodes_.size(), {});
  std::set<std::pair<NodeId, NodeId>> seen;
  for (std::size_t l = 0; l < links_.size(); ++l) {
    const Link& link = links_[l];
    const std::string where = fmt::format("link {} ({} -> {})", l, link.src, link.dst);
    if (!has_node(link.src) || !has_node(link.dst)) {
      throw Error(ErrorKind::kInvalidInput, where + ": dangling endpoint");
    }
    if (link.src == link.dst) {
      throw Error(ErrorKind::kInvalidInput, where + ": self loop");
    }
    if (!(link.capacity > 0.0) || !std::isfinite(link.capacity)) {
      throw Error(ErrorKind::kInvalidInput, where + ": nonpositive capacity");
    }
    if (!(link.weight >= 0.0) || !std::isfinite(link.weight)) {
      throw Error(ErrorKind::kInvalidInput, where + ": negative weight");
    }
    if (!(link.delay_ms >= 0.0) || !std::isfinite(link.delay_ms)) {
      throw Error(ErrorKind::kInvalidInput, where + ": negative delay");
    }
    if (!seen.emplace(link.src, link.dst).second) {
      throw Error(ErrorKind::kInvalidInput, where + ": duplicate link");
    }
    out_[link.src].push_back(static_cast<LinkId>(l));
    in_[link.dst].push_back(static_cast<LinkId>(l));
  }
  for (auto& out : out_) {
    std::sort(out.begin(), out.end(),
              [this](LinkId a, LinkId b) { return links_[a].dst < links_[b].dst; });
  }
  if (!reaches_all(out_, links_, true) || !reaches_all(in_, links_, false)) {
    throw Error(ErrorKind::kInvalidInput, "disconnected graph: topology is not strongly connected");
  }
  capacities_.resize(static_cast<Eigen::Index>(links_.size()));
  for (std::size_t l = 0; l < links_.size(); ++l) capacities_[l] = links_[l].capacity;
}

std::optional<LinkId> NetworkTopology::find_link(NodeId src, NodeId dst) const {
  if (!has_node(src)) return std::nullopt;
  for (LinkId l : out_[src]) {
    if (links_[l].dst == dst) return l;
  }
  return std::nullopt;
}

std::vector<NodeId> NetworkTopology::peering_points() const {
  std::vector<NodeId> out;
  for (const Node& n : nodes_) {
    if (n.is_peering_point) out.push_back(n.id);
  }
  return out;
}

bool operator==(const NetworkTopology& a, const NetworkTopology& b) {
  if (a.nodes_.size() != b.nodes_.size() || a.links_.size() != b.links_.size()) return false;
  for (std::size_t i = 0; i < a.nodes_.size(); ++i) {
    const Node& x = a.nodes_[i];
    const Node& y = b.nodes_[i];
    if (x.id != y.id || x.label != y.label || x.is_peering_point != y.is_peering_point) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.links_.size(); ++i) {
    const Link& x = a.links_[i];
    const Link& y = b.links_[i];
    if (x.src != y.src || x.dst != y.dst || x.capacity != y.capacity || x.weight != y.weight ||
        x.delay_ms != y.delay_ms) {
      return false;
    }
  }
  return true;
}

NetworkTopology load_topology(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kMalformed, fmt::format("topology document: {}", e.what()));
  }
  if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array() ||
      !doc.contains("links") || !doc["links"].is_array()) {
    throw Error(ErrorKind::kMalformed,
                "topology document: expected object with \"nodes\" and \"links\" arrays");
  }
  bool symmetric = doc.value("symmetric", false);

  std::vector<Node> nodes;
  for (std::size_t i = 0; i < doc["nodes"].size(); ++i) {
    const json& record = doc["nodes"][i];
    const std::string where = fmt::format("node record {}", i);
    if (!record.is_object()) throw Error(ErrorKind::kMalformed, where + ": not an object");
    Node node;
    node.id = int_field(record, "id", where);
    node.label = record.value("label", fmt::format("n{}", node.id));
    node.is_peering_point = record.value("is_peering_point", false);
    nodes.push_back(std::move(node));
  }
  std::sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.id < b.id; });

  std::vector<Link> links;
  for (std::size_t i = 0; i < doc["links"].size(); ++i) {
    const json& record = doc["links"][i];
    const std::string where = fmt::format("link record {}", i);
    if (!record.is_object()) throw Error(ErrorKind::kMalformed, where + ": not an object");
    Link link;
    link.src = int_field(record, "src", where);
    link.dst = int_field(record, "dst", where);
    link.capacity = number_field(record, "capacity", 0.0, true, where);
    link.weight = number_field(record, "weight", 1.0, false, where);
    link.delay_ms = number_field(record, "delay_ms", 0.0, false, where);
    links.push_back(link);
    if (symmetric) {
      Link reverse = link;
      std::swap(reverse.src, reverse.dst);
      links.push_back(reverse);
    }
  }
  return NetworkTopology(std::move(nodes), std::move(links));
}

NetworkTopology load_topology_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, fmt::format("cannot read topology file {}", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_topology(buffer.str());
}

RoutingMatrix::RoutingMatrix(std::size_t node_count, std::size_t link_count,
                             std::vector<std::vector<LinkId>> paths)
    : node_count_(node_count), link_count_(link_count), paths_(std::move(paths)) {
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t od = 0; od < paths_.size(); ++od) {
    for (LinkId l : paths_[od]) triplets.emplace_back(l, static_cast<int>(od), 1.0);
  }
  incidence_.resize(static_cast<Eigen::Index>(link_count_),
                    static_cast<Eigen::Index>(paths_.size()));
  incidence_.setFromTriplets(triplets.begin(), triplets.end());
  incidence_.makeCompressed();
}

std::size_t RoutingMatrix::od_index(NodeId origin, NodeId destination) const {
  if (origin < 0 || destination < 0 || static_cast<std::size_t>(origin) >= node_count_ ||
      static_cast<std::size_t>(destination) >= node_count_) {
    throw Error(ErrorKind::kUnknownId,
                fmt::format("unknown OD pair ({}, {})", origin, destination));
  }
  return static_cast<std::size_t>(origin) * node_count_ + static_cast<std::size_t>(destination);
}

const std::vector<LinkId>& RoutingMatrix::path(NodeId origin, NodeId destination) const {
  return paths_[od_index(origin, destination)];
}

bool operator==(const RoutingMatrix& a, const RoutingMatrix& b) {
  return a.node_count_ == b.node_count_ && a.link_count_ == b.link_count_ &&
         a.paths_ == b.paths_;
}

RoutingMatrix compute_routing(const NetworkTopology& topo) {
  const std::size_t n = topo.node_count();
  std::vector<std::vector<LinkId>> paths(n * n);
  for (NodeId d = 0; d < static_cast<NodeId>(n); ++d) {
    const std::vector<Distance> dist = distances_to(topo, d);
    for (NodeId o = 0; o < static_cast<NodeId>(n); ++o) {
      if (o == d) continue;
      if (!std::isfinite(dist[o].weight)) {
        throw Error(ErrorKind::kUnreachable, fmt::format("OD pair ({}, {}) is unreachable", o, d));
      }
      std::vector<LinkId>& path = paths[static_cast<std::size_t>(o) * n + d];
      NodeId v = o;
      while (v != d) {
        std::optional<LinkId> next;
        // out_links are sorted by destination id: the first hop that stays on
        // an optimal path yields the lexicographically smallest sequence.
        for (LinkId l : topo.out_links(v)) {
          const Link& link = topo.link(l);
          const Distance& rest = dist[link.dst];
          if (rest.hops != std::numeric_limits<int>::max() && rest.hops + 1 == dist[v].hops &&
              same_weight(link.weight + rest.weight, dist[v].weight)) {
            next = l;
            break;
          }
        }
        if (!next || path.size() >= n) {
          throw Error(ErrorKind::kNumerical,
                      fmt::format("routing walk for OD pair ({}, {}) lost the shortest path", o, d));
        }
        path.push_back(*next);
        v = topo.link(*next).dst;
      }
    }
  }
  return RoutingMatrix(n, topo.link_count(), std::move(paths));
}

PathProperties path_properties(const RoutingMatrix& routing, const NetworkTopology& topo,
                               NodeId origin, NodeId destination) {
  PathProperties props;
  props.origin = origin;
  props.destination = destination;
  for (LinkId l : routing.path(origin, destination)) {
    const Link& link = topo.link(l);
    ++props.hop_count;
    props.delay_ms += link.delay_ms;
    props.bottleneck_capacity = std::min(props.bottleneck_capacity, link.capacity);
  }
  return props;
}

const std::vector<LinkId>& links_on_path(const RoutingMatrix& routing, NodeId origin,
                                         NodeId destination) {
  return routing.path(origin, destination);
}

std::vector<NodeId> path_nodes(const RoutingMatrix& routing, const NetworkTopology& topo,
                               NodeId origin, NodeId destination) {
  std::vector<NodeId> out{origin};
  for (LinkId l : routing.path(origin, destination)) out.push_back(topo.link(l).dst);
  return out;
}

}  // namespace cate
