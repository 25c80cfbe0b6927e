#include "stabtree/graphgen.hpp"

#include <stdexcept>
#include <vector>

namespace stabtree {

DynamicGraph random_connected_graph(std::uint32_t n, std::uint64_t seed, double extra_edge_prob,
                                    Weight w_lo, Weight w_hi) {
  if (n == 0) throw std::invalid_argument("random_connected_graph: empty graph");
  Rng rng(seed);
  std::vector<EdgeSpec> edges;
  for (NodeId v = 1; v < n; ++v) {
    edges.push_back({rng.below(v), v, rng.real(w_lo, w_hi)});
  }
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      bool have = false;
      for (const auto& e : edges) {
        if ((e.u == u && e.v == v) || (e.u == v && e.v == u)) {
          have = true;
          break;
        }
      }
      if (!have && rng.real01() < extra_edge_prob) {
        edges.push_back({u, v, rng.real(w_lo, w_hi)});
      }
    }
  }
  return DynamicGraph(0, n, edges);
}

TopologyEvent random_crash_event(const DynamicGraph& g, Rng& rng, std::uint64_t at_step) {
  if (g.node_count() < 2) {
    throw std::invalid_argument("random_crash_event: need at least two nodes");
  }
  // Candidates: every edge and every non-root node, shuffled; keep the first
  // one whose removal leaves the graph connected. A leaf crash always
  // qualifies, so the loop terminates.
  struct Candidate {
    TopologyEvent ev;
  };
  std::vector<TopologyEvent> candidates;
  for (const auto& e : g.edges()) {
    candidates.push_back({EventKind::CrashEdge, at_step, e.u, e.v, 0, {}});
  }
  for (NodeId v : g.nodes()) {
    if (v != g.root()) candidates.push_back({EventKind::CrashNode, at_step, v, 0, 0, {}});
  }
  for (std::size_t i = candidates.size(); i > 1; --i) {
    std::swap(candidates[i - 1], candidates[rng.below(static_cast<std::uint32_t>(i))]);
  }
  for (const auto& ev : candidates) {
    try {
      (void)g.apply_event(ev);
      return ev;
    } catch (const EventError&) {
      continue;
    }
  }
  throw std::logic_error("random_crash_event: no valid crash candidate");
}

}  // namespace stabtree
