#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <queue>

#include "stabtree/engine.hpp"
#include "stabtree/graphgen.hpp"
#include "stabtree/protocol.hpp"
#include "stabtree/verify.hpp"
#include "support.hpp"

using namespace stabtree;

namespace {

// Enumerates every configuration of `g` with level and new_level <= cap.
template <typename Fn>
void for_each_capped(std::shared_ptr<const DynamicGraph> g, Level cap, Fn&& fn) {
  const auto ids = g->nodes();
  Configuration c;
  c.graph = g;
  c.states.assign(g->id_bound(), NodeState{});
  auto rec = [&](auto&& self, std::size_t at) -> void {
    if (at == ids.size()) {
      fn(c);
      return;
    }
    const NodeId v = ids[at];
    auto nbs = g->neighbors(v);
    for (std::size_t p = 0; p <= nbs.size(); ++p) {
      for (int st = 0; st < 2; ++st) {
        for (Level lv = 0; lv <= cap; ++lv) {
          for (Level nl = 0; nl <= cap; ++nl) {
            c.states[v] = {p == 0 ? std::optional<Port>{} : std::optional<Port>(nbs[p - 1].port),
                           st ? Status::P : Status::N, lv, nl};
            self(self, at + 1);
          }
        }
      }
    }
  };
  rec(rec, 0);
}

std::vector<std::pair<NodeId, Rule>> engine_moves(const Configuration& c) {
  std::vector<std::pair<NodeId, Rule>> moves;
  for (const auto& na : privileged_nodes(c)) {
    for (int r = 0; r < kRuleCount; ++r) {
      if (na.bits & (1u << r)) moves.emplace_back(na.node, static_cast<Rule>(r));
    }
  }
  return moves;
}

Configuration apply_move(const Configuration& c, NodeId v, Rule r) {
  Configuration next = c;
  next.states[v] = apply_rule(r, local_view(c, v));
  return next;
}

std::vector<std::uint32_t> encode(const Configuration& c) {
  std::vector<std::uint32_t> key;
  for (NodeId v : c.graph->nodes()) {
    const NodeState& s = c.states[v];
    key.push_back(s.parent ? *s.parent : 0);
    key.push_back(static_cast<std::uint32_t>(s.status));
    key.push_back(s.level);
    key.push_back(s.new_level);
  }
  return key;
}

}  // namespace

TEST_CASE("loop_free") {
  auto g = sup::path_graph(3);
  CHECK(loop_free(legitimate_configuration(g)).holds);

  // Mutual parents form the smallest cycle.
  Configuration two = sup::config_on(
      g, {sup::ns({}, Status::N, 0, 0), sup::ns(*g->port_between(1, 2), Status::N, 1, 1),
          sup::ns(*g->port_between(2, 1), Status::N, 2, 2)});
  Verdict v = loop_free(two);
  CHECK_FALSE(v.holds);
  CHECK(v.witness.find("cycle") != std::string::npos);
  CHECK(v.witness.find('1') != std::string::npos);
  CHECK(v.witness.find('2') != std::string::npos);
}

TEST_CASE("loop_free agrees with a DFS oracle on random assignments") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto g = std::make_shared<const DynamicGraph>(random_connected_graph(8, seed / 4));
    Configuration c = random_configuration(g, seed * 13 + 5);
    CHECK(loop_free(c).holds == !sup::dfs_has_parent_cycle(c));
  }
}

TEST_CASE("legitimate") {
  auto g = sup::path_graph(3);
  Configuration c = legitimate_configuration(g);
  CHECK(legitimate(c).holds);
  CHECK(legitimate(c, true).holds);

  Configuration p = c;
  p.states[2].status = Status::P;
  Verdict v = legitimate(p);
  CHECK_FALSE(v.holds);
  CHECK(v.witness.find("status P") != std::string::npos);

  // The paper's formula leaves new_level free off the root; strict mode no.
  Configuration nl = c;
  nl.states[2].new_level = 9;
  CHECK(legitimate(nl).holds);
  CHECK_FALSE(legitimate(nl, true).holds);

  Configuration root_bad = c;
  root_bad.states[0].new_level = 1;
  CHECK_FALSE(legitimate(root_bad).holds);
}

TEST_CASE("legitimate configurations built from the oracle verify") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto g = std::make_shared<const DynamicGraph>(random_connected_graph(15, seed));
    Configuration c = legitimate_configuration(g);
    CHECK(legitimate(c).holds);
    CHECK(legitimate(c, true).holds);
    CHECK(sup::literal_legitimacy(c));
    CHECK(privileged_nodes(c).empty());  // built terminal
  }
}

TEST_CASE("coherent") {
  auto g = sup::path_graph(3);
  CHECK(coherent(legitimate_configuration(g)).holds);

  Configuration c = legitimate_configuration(g);
  c.states[2].new_level = 1;  // below level
  CHECK_FALSE(coherent(c).holds);

  Configuration o = legitimate_configuration(g);
  o.states[2].parent.reset();  // orphans are exempt
  o.states[2].new_level = 0;
  o.states[2].level = 0;
  CHECK(coherent(o).holds);

  Configuration r = legitimate_configuration(g);
  r.states[0].level = 2;
  CHECK_FALSE(coherent(r).holds);
}

TEST_CASE("coherent agrees with direct re-evaluation on random configurations") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto g = std::make_shared<const DynamicGraph>(random_connected_graph(7, seed / 2));
    Configuration c = random_configuration(g, seed + 77);
    bool expect = true;
    for (NodeId v : g->nodes()) {
      const NodeState& s = c.states[v];
      if (v == g->root()) {
        expect &= s.level == 0 && s.status == Status::N;
        continue;
      }
      if (!s.parent) continue;
      auto p = g->peer(v, *s.parent);
      if (!p) continue;
      expect &= c.states[*p].level + 1 <= s.level && s.new_level >= s.level;
    }
    CHECK(coherent(c).holds == expect);
  }
}

TEST_CASE("bfs_oracle") {
  auto star = sup::star_graph(5);
  auto d = bfs_oracle(*star);
  for (NodeId v = 1; v <= 5; ++v) CHECK(d[v] == 1);

  auto path = sup::path_graph(5);
  auto pd = bfs_oracle(*path);
  for (NodeId v = 0; v < 5; ++v) CHECK(pd[v] == v);

  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    auto g = random_connected_graph(30, seed);
    auto got = bfs_oracle(g);
    auto expect = sup::relaxation_distances(g);
    for (NodeId v : g.nodes()) CHECK(got[v] == expect[v]);
  }
}

TEST_CASE("passage: leaf edge crash reparents only the leaf") {
  auto g = sup::make_graph(0, 4, {{0, 1, 1}, {1, 2, 1}, {0, 3, 1}, {3, 2, 1}});
  Configuration c = legitimate_configuration(g);
  TopologyEvent e{EventKind::CrashEdge, 0, 1, 2, 0, {}};
  auto detached = detached_subtree(c, e);
  CHECK(detached == std::vector<NodeId>{2});

  RunOptions opts;
  opts.record = true;
  opts.stop = [](const Configuration& cc) { return legitimate(cc).holds; };
  ExecutionTrace t = run(c, {DaemonKind::Central, 0, 0}, {e}, opts);
  CHECK(legitimate(t.final_config).holds);
  CHECK(passage_holds(t, e).holds);
}

TEST_CASE("passage: crashing a non-tree edge detaches nothing") {
  auto g = sup::triangle_graph();
  Configuration c = legitimate_configuration(g);
  TopologyEvent e{EventKind::CrashEdge, 0, 1, 2, 0, {}};  // both point at root
  CHECK(detached_subtree(c, e).empty());
  RunOptions opts;
  opts.record = true;
  ExecutionTrace t = run(c, {DaemonKind::Central, 0, 0}, {e}, opts);
  CHECK(passage_holds(t, e).holds);
}

TEST_CASE("passage violations and preconditions are reported") {
  auto g = sup::make_graph(0, 3, {{0, 1, 1}, {0, 2, 1}, {1, 2, 1}});
  Configuration c = legitimate_configuration(g);
  TopologyEvent e{EventKind::CrashEdge, 0, 0, 1, 0, {}};

  // Fabricated trace where node 2 (outside the detached subtree) reparents.
  ExecutionTrace t;
  t.recorded = true;
  t.initial = c;
  Configuration after = apply_event_to_configuration(c, e);
  after.states[2].parent = g->port_between(2, 1);
  t.steps.push_back({0, {e}, {{2, Rule::SafeChangeP}}, digest(after)});
  t.snapshots.push_back(after);
  t.final_config = after;
  Verdict v = passage_holds(t, e);
  CHECK_FALSE(v.holds);
  CHECK(v.witness.find("node 2") != std::string::npos);

  TopologyEvent recov{EventKind::RecovEdge, 0, 0, 1, 1.0, {}};
  CHECK_THROWS_AS((void)passage_holds(t, recov), PreconditionViolated);

  ExecutionTrace bad_start = t;
  bad_start.initial.states[1].level = 5;
  CHECK_THROWS_AS((void)passage_holds(bad_start, e), PreconditionViolated);

  ExecutionTrace no_event = t;
  no_event.steps[0].events.clear();
  CHECK_THROWS_AS((void)passage_holds(no_event, e), PreconditionViolated);
}

TEST_CASE("widest_path_oracle") {
  auto single = sup::make_graph(0, 2, {{0, 1, 7.0}});
  auto f = widest_path_oracle(*single);
  CHECK(f[1] == 7.0);
  CHECK(f[0] == kTopFlow);

  // Direct edge to b is thinner than the detour through a.
  auto tri = sup::make_graph(0, 3, {{0, 1, 5.0}, {0, 2, 3.0}, {1, 2, 4.0}});
  auto tf = widest_path_oracle(*tri);
  CHECK(tf[1] == 5.0);
  CHECK(tf[2] == 4.0);
  EdgeSet tree = widest_path_tree(*tri);
  CHECK(tree.contains(0, 1));
  CHECK(tree.contains(1, 2));
  CHECK_FALSE(tree.contains(0, 2));

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto g = random_connected_graph(8, seed, 0.4);
    auto got = widest_path_oracle(g);
    auto expect = sup::enumerate_widest(g);
    for (NodeId v : g.nodes()) CHECK(got[v] == expect[v]);
    CHECK(check_M_maxflow(g, widest_path_tree(g)).holds);
  }
}

TEST_CASE("min_degree_tree_oracle") {
  auto star = sup::star_graph(3);
  auto s = min_degree_tree_oracle(*star);
  CHECK(s.degree == 3);
  CHECK(s.edges.size() == 3);

  auto c4 = sup::make_graph(0, 4, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {3, 0, 1}});
  CHECK(min_degree_tree_oracle(*c4).degree == 2);

  auto k4 = sup::make_graph(
      0, 4, {{0, 1, 1}, {0, 2, 1}, {0, 3, 1}, {1, 2, 1}, {1, 3, 1}, {2, 3, 1}});
  CHECK(min_degree_tree_oracle(*k4).degree == 2);

  // Exhaustive subset enumeration as the second route.
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    auto g = random_connected_graph(6, seed, 0.5);
    std::uint32_t best = 6;
    for (const auto& tree : sup::enumerate_spanning_trees(g)) {
      std::map<NodeId, std::uint32_t> deg;
      std::uint32_t d = 0;
      for (const auto& e : tree) d = std::max({d, ++deg[e.u], ++deg[e.v]});
      best = std::min(best, d);
    }
    auto got = min_degree_tree_oracle(g);
    CHECK(got.degree == best);
    CHECK(check_M_mindeg(g, got.edges).holds);
  }

  CHECK_THROWS_AS((void)min_degree_tree_oracle(random_connected_graph(11, 0)), OracleTooLarge);
}

TEST_CASE("check_M rejects non-trees and suboptimal trees") {
  auto tri = sup::make_graph(0, 3, {{0, 1, 5.0}, {0, 2, 3.0}, {1, 2, 4.0}});
  CHECK_FALSE(check_M_maxflow(*tri, EdgeSet::from_pairs({{0, 1}})).holds);
  CHECK_FALSE(
      check_M_maxflow(*tri, EdgeSet::from_pairs({{0, 1}, {0, 2}, {1, 2}})).holds);
  // Spanning tree that routes b over the thin direct edge.
  Verdict sub = check_M_maxflow(*tri, EdgeSet::from_pairs({{0, 1}, {0, 2}}));
  CHECK_FALSE(sub.holds);
  CHECK(sub.witness.find("node 2") != std::string::npos);
  CHECK(check_M_maxflow(*tri, EdgeSet::from_pairs({{0, 1}, {1, 2}})).holds);

  auto star = sup::star_graph(3);
  CHECK(check_M_mindeg(*star, min_degree_tree_oracle(*star).edges).holds);
  auto k4 = sup::make_graph(
      0, 4, {{0, 1, 1}, {0, 2, 1}, {0, 3, 1}, {1, 2, 1}, {1, 3, 1}, {2, 3, 1}});
  CHECK_FALSE(
      check_M_mindeg(*k4, EdgeSet::from_pairs({{0, 1}, {0, 2}, {0, 3}})).holds);  // star, degree 3
}

TEST_CASE("model_check on the single edge") {
  auto g = sup::path_graph(2);
  ModelCheckResult res = model_check(*g, 4);
  CHECK(res.convergence.holds);
  CHECK(res.loopfree_closure.holds);
  CHECK(res.legitimacy_closure.holds);
  CHECK(res.capped_states == 10000);  // (2*2*5*5)^2
  CHECK(res.legitimate_states == 5);  // root fixed, v's new_level free
  CHECK(res.overall().holds);
}

TEST_CASE("model_check closure verdicts match an engine-route brute force") {
  auto check_graph = [](std::shared_ptr<const DynamicGraph> g, Level cap) {
    bool loopfree_ok = true;
    bool legit_ok = true;
    for_each_capped(g, cap, [&](const Configuration& c) {
      const bool lf = loop_free(c).holds;
      const bool lg = legitimate(c).holds;
      if (!lf && !lg) return;
      for (const auto& [v, r] : engine_moves(c)) {
        Configuration next = apply_move(c, v, r);
        if (lf && !loop_free(next).holds) loopfree_ok = false;
        if (lg && !legitimate(next).holds) legit_ok = false;
      }
    });
    ModelCheckResult res = model_check(*g, cap);
    CHECK(res.loopfree_closure.holds == loopfree_ok);
    CHECK(res.legitimacy_closure.holds == legit_ok);
    CHECK(loopfree_ok);
    CHECK(legit_ok);
  };
  check_graph(sup::path_graph(2), 3);
  check_graph(sup::triangle_graph(), 2);
  check_graph(sup::path_graph(3), 2);
}

TEST_CASE("model_check convergence holds on tiny graphs") {
  ModelCheckResult tri = model_check(*sup::triangle_graph(), 3);
  CHECK(tri.overall().holds);
  ModelCheckResult p3 = model_check(*sup::path_graph(3), 3);
  CHECK(p3.overall().holds);
}

TEST_CASE("model_check rejects oversized inputs") {
  CHECK_THROWS_AS((void)model_check(random_connected_graph(6, 1), 2), StateSpaceTooLarge);
  CHECK_THROWS_AS((void)model_check(*sup::triangle_graph(), 7), StateSpaceTooLarge);
  ModelCheckOptions tight;
  tight.max_states = 100;
  CHECK_THROWS_AS((void)model_check(*sup::triangle_graph(), 2, tight), StateSpaceTooLarge);
}

TEST_CASE("a parent two-cycle on a path is escaped") {
  auto g = sup::path_graph(3);
  Configuration c = sup::config_on(
      g, {sup::ns({}, Status::N, 0, 0), sup::ns(*g->port_between(1, 2), Status::N, 1, 1),
          sup::ns(*g->port_between(2, 1), Status::N, 2, 2)});
  CHECK_FALSE(loop_free(c).holds);
  RunOptions opts;
  opts.stop = [](const Configuration& cc) { return legitimate(cc).holds; };
  ExecutionTrace t = run(c, {DaemonKind::Central, 0, 0}, {}, opts);
  CHECK_FALSE(t.budget_exceeded);
  CHECK(legitimate(t.final_config).holds);
}

TEST_CASE("worst-case shortest schedule to legitimacy on the single edge") {
  // Transition graph over everything reachable from the capped states, then
  // a reversed multi-source BFS from the legitimate set. The worst capped
  // state needs five moves (both registers corrupted, v trapped at level 0).
  auto g = sup::path_graph(2);
  const Level cap = 4;
  std::map<std::vector<std::uint32_t>, std::size_t> index;
  std::vector<Configuration> states;
  std::vector<bool> is_legit;
  std::vector<bool> is_capped;
  auto intern = [&](const Configuration& c, bool capped) {
    auto key = encode(c);
    auto it = index.find(key);
    if (it != index.end()) {
      if (capped) is_capped[it->second] = true;
      return it->second;
    }
    index.emplace(key, states.size());
    states.push_back(c);
    is_legit.push_back(legitimate(c).holds);
    is_capped.push_back(capped);
    return states.size() - 1;
  };
  for_each_capped(g, cap, [&](const Configuration& c) { (void)intern(c, true); });
  std::vector<std::vector<std::size_t>> preds;
  for (std::size_t i = 0; i < states.size(); ++i) {  // states grows as we go
    const Configuration cur = states[i];
    for (const auto& [v, r] : engine_moves(cur)) {
      std::size_t j = intern(apply_move(cur, v, r), false);
      if (preds.size() <= j) preds.resize(j + 1);
      preds[j].push_back(i);
    }
  }
  preds.resize(states.size());
  std::vector<int> dist(states.size(), -1);
  std::queue<std::size_t> q;
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (is_legit[i]) {
      dist[i] = 0;
      q.push(i);
    }
  }
  while (!q.empty()) {
    std::size_t i = q.front();
    q.pop();
    for (std::size_t p : preds[i]) {
      if (dist[p] < 0) {
        dist[p] = dist[i] + 1;
        q.push(p);
      }
    }
  }
  int ecc = 0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (is_capped[i]) {
      REQUIRE(dist[i] >= 0);  // every capped state can reach legitimacy
      ecc = std::max(ecc, dist[i]);
    }
  }
  CHECK(ecc == 5);
}
