#pragma once

// Independent oracles and helpers shared by the test suites. Everything in
// here deliberately avoids the library's own algorithms: connectivity via
// union-find, distances via relaxation, cycle detection via DFS, widest
// paths via path enumeration, spanning trees via subset enumeration.

#include <algorithm>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <vector>

#include "stabtree/configuration.hpp"
#include "stabtree/daemon.hpp"
#include "stabtree/engine.hpp"
#include "stabtree/graph.hpp"
#include "stabtree/protocol.hpp"
#include "stabtree/trace.hpp"
#include "stabtree/verify.hpp"

namespace sup {

using namespace stabtree;

inline std::shared_ptr<const DynamicGraph> make_graph(NodeId root, std::uint32_t n,
                                                      std::vector<EdgeSpec> edges) {
  return std::make_shared<const DynamicGraph>(root, n, edges);
}

inline std::shared_ptr<const DynamicGraph> path_graph(std::uint32_t n) {
  std::vector<EdgeSpec> edges;
  for (NodeId v = 1; v < n; ++v) edges.push_back({v - 1, v, 1.0});
  return make_graph(0, n, edges);
}

inline std::shared_ptr<const DynamicGraph> star_graph(std::uint32_t leaves) {
  std::vector<EdgeSpec> edges;
  for (NodeId v = 1; v <= leaves; ++v) edges.push_back({0, v, 1.0});
  return make_graph(0, leaves + 1, edges);
}

inline std::shared_ptr<const DynamicGraph> triangle_graph() {
  return make_graph(0, 3, {{0, 1, 1.0}, {0, 2, 1.0}, {1, 2, 1.0}});
}

// Union-find connectivity, independent of stabtree::is_connected.
inline bool uf_connected(const DynamicGraph& g) {
  std::vector<NodeId> up(g.id_bound());
  std::iota(up.begin(), up.end(), 0);
  auto find = [&](NodeId v) {
    while (up[v] != v) v = up[v] = up[up[v]];
    return v;
  };
  for (const auto& e : g.edges()) up[find(e.u)] = find(e.v);
  const auto nodes = g.nodes();
  for (NodeId v : nodes) {
    if (find(v) != find(g.root())) return false;
  }
  return true;
}

// Repeated-relaxation hop distances, independent of bfs_oracle's BFS.
inline std::vector<Level> relaxation_distances(const DynamicGraph& g) {
  const Level inf = std::numeric_limits<Level>::max() / 2;
  std::vector<Level> d(g.id_bound(), inf);
  d[g.root()] = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& e : g.edges()) {
      if (d[e.u] + 1 < d[e.v]) {
        d[e.v] = d[e.u] + 1;
        changed = true;
      }
      if (d[e.v] + 1 < d[e.u]) {
        d[e.u] = d[e.v] + 1;
        changed = true;
      }
    }
  }
  return d;
}

// Recursive DFS cycle detection on the parent digraph, independent of
// stabtree::loop_free's chain walking.
inline bool dfs_has_parent_cycle(const Configuration& c) {
  const DynamicGraph& g = *c.graph;
  std::vector<int> color(g.id_bound(), 0);
  auto next = [&](NodeId v) -> std::optional<NodeId> {
    if (v == g.root()) return std::nullopt;
    if (!c.states[v].parent) return std::nullopt;
    return g.peer(v, *c.states[v].parent);
  };
  for (NodeId s : g.nodes()) {
    if (color[s] != 0) continue;
    std::vector<NodeId> stack{s};
    while (!stack.empty()) {
      NodeId v = stack.back();
      if (color[v] == 0) {
        color[v] = 1;
        auto n = next(v);
        if (n) {
          if (color[*n] == 1) return true;
          if (color[*n] == 0) {
            stack.push_back(*n);
            continue;
          }
        }
      }
      color[v] = 2;
      stack.pop_back();
    }
  }
  return false;
}

// Bottleneck of the best simple path from the root, by full enumeration.
inline std::vector<Weight> enumerate_widest(const DynamicGraph& g) {
  std::vector<Weight> best(g.id_bound(), -1.0);
  best[g.root()] = std::numeric_limits<Weight>::infinity();
  std::vector<bool> used(g.id_bound(), false);
  used[g.root()] = true;
  std::vector<std::pair<NodeId, Weight>> stack;
  auto rec = [&](auto&& self, NodeId v, Weight bottleneck) -> void {
    for (const auto& a : g.neighbors(v)) {
      if (used[a.peer]) continue;
      const Weight b = std::min(bottleneck, a.weight);
      best[a.peer] = std::max(best[a.peer], b);
      used[a.peer] = true;
      self(self, a.peer, b);
      used[a.peer] = false;
    }
  };
  rec(rec, g.root(), std::numeric_limits<Weight>::infinity());
  return best;
}

// All spanning trees by (n-1)-subset enumeration; keep it to tiny graphs.
inline std::vector<std::vector<EdgeSpec>> enumerate_spanning_trees(const DynamicGraph& g) {
  const auto edges = g.edges();
  const std::size_t n = g.node_count();
  std::vector<std::vector<EdgeSpec>> trees;
  std::vector<std::size_t> pick;
  auto connected_subset = [&](const std::vector<std::size_t>& subset) {
    std::vector<NodeId> up(g.id_bound());
    std::iota(up.begin(), up.end(), 0);
    auto find = [&](NodeId v) {
      while (up[v] != v) v = up[v] = up[up[v]];
      return v;
    };
    std::size_t joins = 0;
    for (std::size_t i : subset) {
      NodeId a = find(edges[i].u), b = find(edges[i].v);
      if (a == b) return false;
      up[a] = b;
      ++joins;
    }
    return joins == n - 1;
  };
  auto rec = [&](auto&& self, std::size_t from) -> void {
    if (pick.size() == n - 1) {
      if (connected_subset(pick)) {
        std::vector<EdgeSpec> t;
        for (std::size_t i : pick) t.push_back(edges[i]);
        trees.push_back(std::move(t));
      }
      return;
    }
    for (std::size_t i = from; i < edges.size(); ++i) {
      pick.push_back(i);
      self(self, i + 1);
      pick.pop_back();
    }
  };
  rec(rec, 0);
  return trees;
}

// Literal evaluation of the legitimacy predicate, written separately from
// verify.cpp: root at level 0 with status N; every other node at its optimal
// level with status N and level = parent level + 1.
inline bool literal_legitimacy(const Configuration& c) {
  const DynamicGraph& g = *c.graph;
  const auto opt = relaxation_distances(g);
  for (NodeId v : g.nodes()) {
    const NodeState& s = c.states[v];
    if (v == g.root()) {
      if (s.level != 0 || s.status != Status::N) return false;
      continue;
    }
    if (s.status != Status::N || s.level != opt[v]) return false;
    if (!s.parent) return false;
    auto p = g.peer(v, *s.parent);
    if (!p || s.level != c.states[*p].level + 1) return false;
  }
  return true;
}

// Independent recomputation of round boundaries from a recorded trace.
inline std::size_t recount_rounds(const ExecutionTrace& t) {
  std::size_t complete = 0;
  std::set<NodeId> remaining;
  bool active = false;
  const Configuration* cur = &t.initial;
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    // Configuration at the boundary before step i's firings: the previous
    // snapshot with step i's events applied.
    Configuration boundary = *cur;
    for (const auto& e : t.steps[i].events) {
      boundary = apply_event_to_configuration(boundary, e);
    }
    std::set<NodeId> priv;
    for (const auto& na : privileged_nodes(boundary)) priv.insert(na.node);
    if (active) {
      std::set<NodeId> keep;
      std::set_intersection(remaining.begin(), remaining.end(), priv.begin(), priv.end(),
                            std::inserter(keep, keep.end()));
      remaining = std::move(keep);
      if (remaining.empty()) {
        ++complete;
        active = false;
      }
    }
    if (!active && !priv.empty()) {
      remaining = priv;
      active = true;
    }
    for (const auto& f : t.steps[i].firings) remaining.erase(f.node);
    if (active && remaining.empty()) {
      ++complete;
      active = false;
    }
    cur = &t.snapshots[i];
  }
  // Trailing boundary: nodes that became unprivileged in the final state.
  if (active) {
    std::set<NodeId> priv;
    for (const auto& na : privileged_nodes(*cur)) priv.insert(na.node);
    std::set<NodeId> keep;
    std::set_intersection(remaining.begin(), remaining.end(), priv.begin(), priv.end(),
                          std::inserter(keep, keep.end()));
    if (keep.empty()) ++complete;
  }
  return complete;
}

// Weak-fairness audit: over a recorded trace, no (node, rule) stays enabled
// through more than `bound` consecutive steps without the node firing.
inline bool weak_fairness_respected(const ExecutionTrace& t, std::uint32_t bound) {
  std::map<std::pair<NodeId, int>, std::uint32_t> streak;
  const Configuration* cur = &t.initial;
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    Configuration boundary = *cur;
    for (const auto& e : t.steps[i].events) {
      boundary = apply_event_to_configuration(boundary, e);
    }
    std::set<NodeId> fired;
    for (const auto& f : t.steps[i].firings) fired.insert(f.node);
    std::map<std::pair<NodeId, int>, std::uint32_t> next;
    for (const auto& na : privileged_nodes(boundary)) {
      for (int r = 0; r < kRuleCount; ++r) {
        if (!(na.bits & (1u << r))) continue;
        if (fired.count(na.node)) continue;
        auto key = std::pair(na.node, r);
        auto it = streak.find(key);
        const std::uint32_t s = (it == streak.end() ? 0 : it->second) + 1;
        if (s > bound) return false;
        next[key] = s;
      }
    }
    streak = std::move(next);
    cur = &t.snapshots[i];
  }
  return true;
}

inline Configuration config_on(std::shared_ptr<const DynamicGraph> g,
                               std::vector<NodeState> states) {
  Configuration c;
  c.graph = std::move(g);
  c.states = std::move(states);
  c.states.resize(c.graph->id_bound());
  return c;
}

inline NodeState ns(std::optional<Port> parent, Status status, Level level, Level new_level) {
  return NodeState{parent, status, level, new_level};
}

}  // namespace sup
