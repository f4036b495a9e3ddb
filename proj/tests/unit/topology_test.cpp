#include <doctest.h>

#include <algorithm>
#include <functional>
#include <limits>
#include <vector>

#include "cate/error.hpp"
#include "cate/topology.hpp"
#include "fixtures.hpp"
#include "random_instance.hpp"

using namespace cate;
using cate::testing::symmetric_topology;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::kIo;
}

// Every simple path by DFS; the expected route minimises (weight, hops,
// node sequence).
std::vector<NodeId> brute_force_route(const NetworkTopology& topo, NodeId o, NodeId d) {
  struct Best {
    double weight = std::numeric_limits<double>::infinity();
    std::size_t hops = 0;
    std::vector<NodeId> nodes;
  } best;
  std::vector<NodeId> stack{o};
  std::vector<bool> seen(topo.node_count(), false);
  seen[o] = true;
  std::function<void(double)> dfs = [&](double w) {
    const NodeId u = stack.back();
    if (u == d) {
      const std::size_t hops = stack.size() - 1;
      if (w < best.weight || (w == best.weight && (hops < best.hops || (hops == best.hops && stack < best.nodes)))) {
        best = {w, hops, stack};
      }
      return;
    }
    for (LinkId l : topo.out_links(u)) {
      const Link& link = topo.link(l);
      if (seen[link.dst]) continue;
      seen[link.dst] = true;
      stack.push_back(link.dst);
      dfs(w + link.weight);
      stack.pop_back();
      seen[link.dst] = false;
    }
  };
  dfs(0.0);
  return best.nodes;
}

}  // namespace

TEST_CASE("triangle builds six directed links") {
  const NetworkTopology topo = cate::testing::triangle();
  CHECK(topo.node_count() == 3);
  CHECK(topo.link_count() == 6);
  CHECK(topo.find_link(2, 0).has_value());
}

TEST_CASE("malformed topologies are rejected") {
  const std::vector<Node> nodes{{0, "a", true}, {1, "b", true}, {2, "c", true}};
  SUBCASE("dangling endpoint") {
    try {
      NetworkTopology(nodes, {{0, 99, 1.0, 1.0, 0.0}});
      FAIL("accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kInvalidInput);
      CHECK(std::string(e.what()).find("dangling endpoint") != std::string::npos);
    }
  }
  SUBCASE("nonpositive capacity") {
    CHECK(kind_of([&] { NetworkTopology(nodes, {{0, 1, 0.0, 1.0, 0.0}}); }) == ErrorKind::kInvalidInput);
  }
  SUBCASE("disconnected") {
    CHECK(kind_of([&] { NetworkTopology(nodes, {{0, 1, 1.0, 1.0, 0.0}, {1, 0, 1.0, 1.0, 0.0}}); }) ==
          ErrorKind::kInvalidInput);
  }
  SUBCASE("bad document") {
    CHECK(kind_of([] { load_topology("{\"nodes\": 3}"); }) == ErrorKind::kMalformed);
    CHECK(kind_of([] { load_topology("not json"); }) == ErrorKind::kMalformed);
  }
}

TEST_CASE("JSON document defaults and symmetric expansion") {
  const NetworkTopology topo = load_topology(R"({
    "symmetric": true,
    "nodes": [{"id": 0, "label": "a", "is_peering_point": true}, {"id": 1, "label": "b"}],
    "links": [{"src": 0, "dst": 1, "capacity": 5}]
  })");
  REQUIRE(topo.link_count() == 2);
  CHECK(topo.link(0).weight == 1.0);
  CHECK(topo.link(0).delay_ms == 0.0);
  CHECK(topo.peering_points() == std::vector<NodeId>{0});
}

TEST_CASE("Abilene document has 12 nodes and 30 directed links") {
  const NetworkTopology topo = load_topology_file(cate::testing::data_dir() / "abilene" / "topology.json");
  CHECK(topo.node_count() == 12);
  CHECK(topo.link_count() == 30);
}

TEST_CASE("shortest-path routing examples") {
  SUBCASE("triangle direct link") {
    const NetworkTopology topo = cate::testing::triangle();
    const RoutingMatrix r = compute_routing(topo);
    CHECK(path_properties(r, topo, 0, 1).hop_count == 1);
  }
  SUBCASE("line goes through the middle") {
    const NetworkTopology topo = cate::testing::line3(2.0, 3.0);
    const RoutingMatrix r = compute_routing(topo);
    CHECK(path_nodes(r, topo, 0, 2) == std::vector<NodeId>{0, 1, 2});
    CHECK(links_on_path(r, 0, 2) == std::vector<LinkId>{*topo.find_link(0, 1), *topo.find_link(1, 2)});
    const PathProperties p = path_properties(r, topo, 0, 2);
    CHECK(p.hop_count == 2);
    CHECK(p.delay_ms == doctest::Approx(5.0));
  }
  SUBCASE("square tie goes through the lower-id neighbour") {
    const NetworkTopology topo = cate::testing::square();
    const RoutingMatrix r = compute_routing(topo);
    CHECK(path_nodes(r, topo, 0, 2) == std::vector<NodeId>{0, 1, 2});
    CHECK(links_on_path(r, 0, 2) == std::vector<LinkId>{*topo.find_link(0, 1), *topo.find_link(1, 2)});
  }
  SUBCASE("self pair is empty") {
    const NetworkTopology topo = cate::testing::triangle();
    const RoutingMatrix r = compute_routing(topo);
    const PathProperties p = path_properties(r, topo, 1, 1);
    CHECK(p.hop_count == 0);
    CHECK(p.delay_ms == 0.0);
    CHECK(links_on_path(r, 1, 1).empty());
  }
  SUBCASE("bottleneck is the smallest capacity") {
    const NetworkTopology topo = symmetric_topology(3, {{0, 1, 10.0, 1.0}, {1, 2, 5.0, 1.0}, {0, 2, 1.0, 5.0}});
    const RoutingMatrix r = compute_routing(topo);
    CHECK(path_properties(r, topo, 0, 2).bottleneck_capacity == 5.0);
  }
}

TEST_CASE("unknown ids are reported") {
  const RoutingMatrix r = compute_routing(cate::testing::triangle());
  CHECK(kind_of([&] { r.path(0, 7); }) == ErrorKind::kUnknownId);
}

TEST_CASE("routing matches brute-force enumeration on random graphs") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    std::mt19937_64 rng(seed);
    const NetworkTopology topo = cate::testing::random_topology(rng, cate::testing::draw(rng, 3, 8));
    const RoutingMatrix r = compute_routing(topo);
    for (NodeId o = 0; o < static_cast<NodeId>(topo.node_count()); ++o) {
      for (NodeId d = 0; d < static_cast<NodeId>(topo.node_count()); ++d) {
        CAPTURE(seed);
        CAPTURE(o);
        CAPTURE(d);
        CHECK(path_nodes(r, topo, o, d) == brute_force_route(topo, o, d));
      }
    }
  }
}

TEST_CASE("incidence matrix reproduces per-path loads") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    const NetworkTopology topo = cate::testing::random_topology(rng, 6);
    const RoutingMatrix r = compute_routing(topo);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(r.od_count()));
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(topo.link_count()));
    for (NodeId o = 0; o < 6; ++o) {
      for (NodeId d = 0; d < 6; ++d) {
        const double v = cate::testing::draw(rng, 0, 9);
        x[static_cast<Eigen::Index>(r.od_index(o, d))] = v;
        for (LinkId l : r.path(o, d)) {
          expected[l] += v;
          CHECK(r.traverses(r.od_index(o, d), l));
        }
      }
    }
    CHECK((r.link_loads(x) - expected).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("routed paths are prefix consistent") {
  std::mt19937_64 rng(99);
  const NetworkTopology topo = cate::testing::random_topology(rng, 9);
  const RoutingMatrix r = compute_routing(topo);
  for (NodeId o = 0; o < 9; ++o) {
    for (NodeId d = 0; d < 9; ++d) {
      const std::vector<NodeId> nodes = path_nodes(r, topo, o, d);
      for (std::size_t k = 1; k + 1 < nodes.size(); ++k) {
        const std::vector<NodeId> sub = path_nodes(r, topo, o, nodes[k]);
        CHECK(std::equal(sub.begin(), sub.end(), nodes.begin()));
      }
    }
  }
}
