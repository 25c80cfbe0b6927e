#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>

#include "stabtree/graph.hpp"
#include "stabtree/graphgen.hpp"
#include "support.hpp"

using namespace stabtree;

namespace {

TopologyEvent crash_edge(NodeId u, NodeId v) { return {EventKind::CrashEdge, 0, u, v, 0, {}}; }
TopologyEvent crash_node(NodeId u) { return {EventKind::CrashNode, 0, u, 0, 0, {}}; }
TopologyEvent recov_edge(NodeId u, NodeId v, Weight w) {
  return {EventKind::RecovEdge, 0, u, v, w, {}};
}

}  // namespace

TEST_CASE("crashing a bridge of a path is rejected") {
  auto g = sup::path_graph(3);
  CHECK_THROWS_AS((void)g->apply_event(crash_edge(1, 2)), EventError);
  try {
    (void)g->apply_event(crash_edge(1, 2));
  } catch (const EventError& e) {
    CHECK(e.kind() == EventErrorKind::DisconnectingEvent);
  }
}

TEST_CASE("crashing a triangle edge keeps the graph connected") {
  auto g = sup::triangle_graph();
  DynamicGraph after = g->apply_event(crash_edge(1, 2));
  CHECK(after.edge_count() == 2);
  CHECK(is_connected(after));
  CHECK(after.has_edge(0, 1));
  CHECK(after.has_edge(0, 2));
  CHECK_FALSE(after.has_edge(1, 2));
}

TEST_CASE("node deletion leaves the child's parent port dangling") {
  // Chain r - b - v: after b crashes, v's old port to b maps to nothing.
  auto g = sup::make_graph(0, 4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {0, 3, 1.0}});
  const Port v_to_b = *g->port_between(2, 1);
  DynamicGraph after = g->apply_event(crash_node(1));
  CHECK_FALSE(after.present(1));
  CHECK(after.peer(2, v_to_b) == std::nullopt);
  CHECK(is_connected(after));
}

TEST_CASE("event validation errors") {
  auto g = sup::triangle_graph();
  SUBCASE("root crash") {
    CHECK_THROWS_AS((void)g->apply_event(crash_node(0)), EventError);
    try {
      (void)g->apply_event(crash_node(0));
    } catch (const EventError& e) {
      CHECK(e.kind() == EventErrorKind::RootCrash);
    }
  }
  SUBCASE("missing subjects") {
    try {
      (void)g->apply_event(crash_edge(0, 3));
      CHECK(false);
    } catch (const EventError& e) {
      CHECK(e.kind() == EventErrorKind::MissingSubject);
    }
    try {
      (void)g->apply_event(crash_node(9));
      CHECK(false);
    } catch (const EventError& e) {
      CHECK(e.kind() == EventErrorKind::MissingSubject);
    }
  }
  SUBCASE("duplicate edge") {
    try {
      (void)g->apply_event(recov_edge(0, 1, 2.0));
      CHECK(false);
    } catch (const EventError& e) {
      CHECK(e.kind() == EventErrorKind::DuplicateEdge);
    }
  }
  SUBCASE("recov_node on a present node") {
    TopologyEvent e{EventKind::RecovNode, 0, 1, 0, 0, {{0, 1.0}}};
    CHECK_THROWS_AS((void)g->apply_event(e), EventError);
  }
}

TEST_CASE("is_connected basics") {
  CHECK(is_connected(*sup::make_graph(0, 1, {})));
  CHECK_FALSE(is_connected(*sup::make_graph(0, 4, {{0, 1, 1.0}, {2, 3, 1.0}})));
}

TEST_CASE("is_connected agrees with a union-find oracle on random graphs") {
  Rng rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    // Random edge subsets over 10 nodes, connected or not.
    std::vector<EdgeSpec> edges;
    for (NodeId u = 0; u < 10; ++u) {
      for (NodeId v = u + 1; v < 10; ++v) {
        if (rng.real01() < 0.12) edges.push_back({u, v, 1.0});
      }
    }
    DynamicGraph g(0, 10, edges);
    CHECK(is_connected(g) == sup::uf_connected(g));
  }
  // And a guaranteed-connected one.
  auto g = random_connected_graph(10, 99);
  CHECK(is_connected(g));
  CHECK(sup::uf_connected(g));
}

TEST_CASE("invariants hold along random valid event sequences") {
  Rng rng(1234);
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    DynamicGraph g = random_connected_graph(8, seed);
    // Remember every (edge -> port at endpoint) binding ever observed, and
    // the largest label ever used per node.
    std::map<std::pair<NodeId, NodeId>, Port> seen_ports;
    std::map<NodeId, Port> max_port;
    auto note = [&](const DynamicGraph& cur) {
      for (NodeId v = 0; v < cur.id_bound(); ++v) {
        if (!cur.present(v)) continue;
        std::set<Port> ports;
        for (const auto& a : cur.neighbors(v)) {
          CHECK(ports.insert(a.port).second);  // unique labels per node
          CHECK(a.weight > 0);
          // undirected: the peer sees this edge too
          CHECK(cur.port_between(a.peer, v).has_value());
          auto key = std::pair(std::min(v, a.peer), std::max(v, a.peer));
          auto it = seen_ports.find({v, a.peer});
          if (it != seen_ports.end()) {
            CHECK(it->second == a.port);  // label stability for survivors
          }
          seen_ports[{v, a.peer}] = a.port;
          auto& mp = max_port[v];
          mp = std::max(mp, a.port);
          (void)key;
        }
      }
    };
    note(g);
    for (int ev = 0; ev < 30; ++ev) {
      TopologyEvent e;
      const int kind = rng.below(4);
      bool applied = false;
      try {
        switch (kind) {
          case 0:
          case 1:
            if (g.node_count() >= 2) {
              e = random_crash_event(g, rng);
              g = g.apply_event(e);
              applied = true;
            }
            break;
          case 2: {
            NodeId u = rng.below(g.id_bound()), v = rng.below(g.id_bound());
            e = {EventKind::RecovEdge, 0, u, v, 1.0 + rng.real01(), {}};
            g = g.apply_event(e);
            applied = true;
            break;
          }
          case 3: {
            NodeId u = rng.below(g.id_bound() + 1);
            TopologyEvent r{EventKind::RecovNode, 0, u, 0, 0, {}};
            for (NodeId nb = 0; nb < g.id_bound(); ++nb) {
              if (g.present(nb) && rng.coin()) r.adjacency.emplace_back(nb, 1.0 + rng.real01());
            }
            g = g.apply_event(r);
            applied = true;
            e = r;
            break;
          }
        }
      } catch (const EventError&) {
        continue;  // invalid proposal, try another
      }
      if (!applied) continue;
      CHECK(is_connected(g));
      CHECK(g.present(g.root()));
      // Fresh labels exceed anything the endpoint handed out before.
      if (e.kind == EventKind::RecovEdge) {
        CHECK(*g.port_between(e.u, e.v) > max_port[e.u]);
        CHECK(*g.port_between(e.v, e.u) > max_port[e.v]);
        seen_ports.erase({e.u, e.v});
        seen_ports.erase({e.v, e.u});
      }
      if (e.kind == EventKind::RecovNode || e.kind == EventKind::CrashNode) {
        // Forget bindings of the churned node; recovery hands out new ones.
        for (auto it = seen_ports.begin(); it != seen_ports.end();) {
          if (it->first.first == e.u || it->first.second == e.u) {
            it = seen_ports.erase(it);
          } else {
            ++it;
          }
        }
      }
      note(g);
    }
  }
}

TEST_CASE("snapshots are immutable: apply_event leaves the source untouched") {
  auto g = sup::triangle_graph();
  const auto digest_before = g->structure_digest();
  (void)g->apply_event(crash_edge(1, 2));
  CHECK(g->structure_digest() == digest_before);
  CHECK(g->edge_count() == 3);
}

TEST_CASE("edge set lookups") {
  EdgeSet s = EdgeSet::from_pairs({{3, 1}, {0, 2}});
  CHECK(s.contains(1, 3));
  CHECK(s.contains(3, 1));
  CHECK(s.contains(2, 0));
  CHECK_FALSE(s.contains(0, 1));
  CHECK(s.size() == 2);
}
