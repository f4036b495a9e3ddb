#ifndef CATE_TESTS_FIXTURES_HPP_
#define CATE_TESTS_FIXTURES_HPP_

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "cate/assignment.hpp"
#include "cate/demand.hpp"
#include "cate/error.hpp"
#include "cate/topology.hpp"

namespace cate::testing {

inline std::filesystem::path data_dir() { return CATE_DATA_DIR; }

/// Symmetric topology from undirected edges (a, b, capacity, weight, delay).
struct Edge {
  NodeId a = 0;
  NodeId b = 0;
  double capacity = 1.0;
  double weight = 1.0;
  double delay_ms = 0.0;
};

inline NetworkTopology symmetric_topology(int nodes, const std::vector<Edge>& edges) {
  std::vector<Node> ns;
  for (int i = 0; i < nodes; ++i) ns.push_back({i, "n" + std::to_string(i), true});
  std::vector<Link> links;
  for (const Edge& e : edges) {
    links.push_back({e.a, e.b, e.capacity, e.weight, e.delay_ms});
    links.push_back({e.b, e.a, e.capacity, e.weight, e.delay_ms});
  }
  return NetworkTopology(std::move(ns), std::move(links));
}

inline NetworkTopology triangle(double capacity = 1.0) {
  return symmetric_topology(3, {{0, 1, capacity}, {1, 2, capacity}, {0, 2, capacity}});
}

inline NetworkTopology line3(double d01 = 0.0, double d12 = 0.0) {
  return symmetric_topology(3, {{0, 1, 10.0, 1.0, d01}, {1, 2, 10.0, 1.0, d12}});
}

/// 0-1-2 and 0-3-2 with equal weights.
inline NetworkTopology square() {
  return symmetric_topology(4, {{0, 1}, {1, 2}, {0, 3}, {3, 2}});
}

struct TwoBottleneck {
  NetworkTopology topo;
  RoutingMatrix routing;
  ContentDemandMatrix matrix;
  BinProblem problem;
  LinkId x_core;
  LinkId y_core;
};

inline TwoBottleneck load_two_bottleneck() {
  NetworkTopology topo = load_topology_file(data_dir() / "two_bottleneck" / "topology.json");
  RoutingMatrix routing = compute_routing(topo);
  ContentDemandMatrix matrix = ingest_demands_file(data_dir() / "two_bottleneck" / "demands.json", topo);
  BinProblem problem = make_bin_problem(split_adjustable(matrix, 0, {1, 2}), routing, {});
  const LinkId x = *topo.find_link(0, 2);
  const LinkId y = *topo.find_link(1, 2);
  return {std::move(topo), std::move(routing), std::move(matrix), std::move(problem), x, y};
}

}  // namespace cate::testing

#endif  // CATE_TESTS_FIXTURES_HPP_
