#include <algorithm>
#include <sstream>

#include "stabtree/verify.hpp"

namespace stabtree {

std::vector<Weight> widest_path_oracle(const DynamicGraph& g) {
  // Bottleneck variant of Dijkstra: grow from the root, always settling the
  // node with the best achievable bottleneck so far.
  std::vector<Weight> flow(g.id_bound(), -1.0);
  std::vector<bool> settled(g.id_bound(), false);
  flow[g.root()] = kTopFlow;
  while (true) {
    NodeId best = g.id_bound();
    for (NodeId v : g.nodes()) {
      if (!settled[v] && flow[v] >= 0 && (best == g.id_bound() || flow[v] > flow[best])) {
        best = v;
      }
    }
    if (best == g.id_bound()) break;
    settled[best] = true;
    for (const auto& a : g.neighbors(best)) {
      flow[a.peer] = std::max(flow[a.peer], std::min(flow[best], a.weight));
    }
  }
  return flow;
}

EdgeSet widest_path_tree(const DynamicGraph& g) {
  const auto flow = widest_path_oracle(g);
  std::vector<std::pair<NodeId, NodeId>> edges;
  // Attach each node to the smallest port whose neighbor already carries the
  // node's optimal flow. Some unattached node always has such a supporter,
  // so the passes terminate with a spanning tree realizing the oracle.
  std::vector<bool> attached(g.id_bound(), false);
  attached[g.root()] = true;
  bool grew = true;
  while (grew) {
    grew = false;
    for (NodeId v : g.nodes()) {
      if (attached[v]) continue;
      for (const auto& a : g.neighbors(v)) {  // ascending port
        if (attached[a.peer] && std::min(flow[a.peer], a.weight) == flow[v]) {
          edges.emplace_back(v, a.peer);
          attached[v] = true;
          grew = true;
          break;
        }
      }
    }
  }
  return EdgeSet::from_pairs(std::move(edges));
}

namespace {

struct Dsu {
  std::vector<NodeId> up;
  explicit Dsu(std::size_t n) : up(n) {
    for (std::size_t i = 0; i < n; ++i) up[i] = static_cast<NodeId>(i);
  }
  NodeId find(NodeId v) {
    while (up[v] != v) v = up[v] = up[up[v]];
    return v;
  }
  bool join(NodeId a, NodeId b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    up[a] = b;
    return true;
  }
};

// Backtracking search for a spanning tree with maximum degree <= bound.
bool tree_with_degree_bound(const std::vector<EdgeSpec>& edges, const std::vector<NodeId>& ids,
                            std::uint32_t bound, std::size_t at, Dsu dsu,
                            std::vector<std::uint32_t> deg, std::size_t picked,
                            std::vector<std::size_t>& chosen) {
  const std::size_t need = ids.size() - 1;
  if (picked == need) return true;
  if (at == edges.size() || edges.size() - at < need - picked) return false;

  const auto& e = edges[at];
  if (deg[e.u] < bound && deg[e.v] < bound) {
    Dsu next = dsu;
    if (next.join(e.u, e.v)) {
      auto next_deg = deg;
      ++next_deg[e.u];
      ++next_deg[e.v];
      chosen.push_back(at);
      if (tree_with_degree_bound(edges, ids, bound, at + 1, std::move(next),
                                 std::move(next_deg), picked + 1, chosen)) {
        return true;
      }
      chosen.pop_back();
    }
  }
  return tree_with_degree_bound(edges, ids, bound, at + 1, std::move(dsu), std::move(deg),
                                picked, chosen);
}

}  // namespace

MinDegreeTree min_degree_tree_oracle(const DynamicGraph& g) {
  if (g.node_count() > 10) {
    throw OracleTooLarge("min_degree_tree_oracle: more than 10 nodes");
  }
  const auto ids = g.nodes();
  auto edges = g.edges();
  if (ids.size() == 1) return {EdgeSet{}, 0};
  for (std::uint32_t bound = 1; bound < ids.size(); ++bound) {
    std::vector<std::size_t> chosen;
    Dsu dsu(g.id_bound());
    std::vector<std::uint32_t> deg(g.id_bound(), 0);
    if (tree_with_degree_bound(edges, ids, bound, 0, std::move(dsu), std::move(deg), 0,
                               chosen)) {
      std::vector<std::pair<NodeId, NodeId>> pairs;
      std::uint32_t max_deg = 0;
      std::vector<std::uint32_t> final_deg(g.id_bound(), 0);
      for (std::size_t i : chosen) {
        pairs.emplace_back(edges[i].u, edges[i].v);
        max_deg = std::max({max_deg, ++final_deg[edges[i].u], ++final_deg[edges[i].v]});
      }
      return {EdgeSet::from_pairs(std::move(pairs)), max_deg};
    }
  }
  throw std::logic_error("min_degree_tree_oracle: connected graph has a spanning tree");
}

namespace {

// Shared spanning-structure clauses of both M predicates:
// |S| = n-1, S covers V, and S is connected (hence a spanning tree).
Verdict spanning_tree_clauses(const DynamicGraph& g, const EdgeSet& s) {
  const std::size_t n = g.node_count();
  if (s.size() != n - 1) {
    std::ostringstream w;
    w << "edge set size " << s.size() << " != n-1 = " << n - 1;
    return Verdict::fail(w.str());
  }
  Dsu dsu(g.id_bound());
  std::vector<bool> touched(g.id_bound(), false);
  touched[g.root()] = true;
  for (const auto& [u, v] : s.pairs()) {
    if (!g.has_edge(u, v)) {
      std::ostringstream w;
      w << "edge (" << u << ',' << v << ") not in the graph";
      return Verdict::fail(w.str());
    }
    touched[u] = touched[v] = true;
    if (!dsu.join(u, v)) return Verdict::fail("edge set contains a cycle");
  }
  for (NodeId v : g.nodes()) {
    if (!touched[v]) {
      std::ostringstream w;
      w << "node " << v << " not covered by the edge set";
      return Verdict::fail(w.str());
    }
    if (dsu.find(v) != dsu.find(g.root())) {
      std::ostringstream w;
      w << "node " << v << " not connected to the root in the edge set";
      return Verdict::fail(w.str());
    }
  }
  return Verdict::ok();
}

// Tree flows fw(v) = min(fw(parent), w(parent,v)) with the top value at r.
std::vector<Weight> tree_flows(const DynamicGraph& g, const EdgeSet& s) {
  std::vector<Weight> fw(g.id_bound(), -1.0);
  fw[g.root()] = kTopFlow;
  std::vector<NodeId> stack{g.root()};
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    for (const auto& a : g.neighbors(v)) {
      if (fw[a.peer] < 0 && s.contains(v, a.peer)) {
        fw[a.peer] = std::min(fw[v], a.weight);
        stack.push_back(a.peer);
      }
    }
  }
  return fw;
}

}  // namespace

Verdict check_M_maxflow(const DynamicGraph& g, const EdgeSet& s) {
  if (auto v = spanning_tree_clauses(g, s); !v.holds) return v;
  const auto fw = tree_flows(g, s);
  const auto optimal = widest_path_oracle(g);
  // Root flow is the boundary value; the fixpoint clause binds the others.
  for (NodeId v : g.nodes()) {
    if (v == g.root()) continue;
    Weight best = 0;
    for (const auto& a : g.neighbors(v)) best = std::max(best, std::min(fw[a.peer], a.weight));
    if (fw[v] != best) {
      std::ostringstream w;
      w << "node " << v << " tree flow " << fw[v] << " != neighborhood best " << best;
      return Verdict::fail(w.str());
    }
    if (fw[v] != optimal[v]) {
      std::ostringstream w;
      w << "node " << v << " tree flow " << fw[v] << " != optimal flow " << optimal[v];
      return Verdict::fail(w.str());
    }
  }
  return Verdict::ok();
}

Verdict check_M_mindeg(const DynamicGraph& g, const EdgeSet& s) {
  if (auto v = spanning_tree_clauses(g, s); !v.holds) return v;
  std::vector<std::uint32_t> deg(g.id_bound(), 0);
  std::uint32_t max_deg = 0;
  for (const auto& [u, v] : s.pairs()) max_deg = std::max({max_deg, ++deg[u], ++deg[v]});
  const auto best = min_degree_tree_oracle(g);
  if (max_deg != best.degree) {
    std::ostringstream w;
    w << "tree degree " << max_deg << " != optimal degree " << best.degree;
    return Verdict::fail(w.str());
  }
  return Verdict::ok();
}

}  // namespace stabtree
