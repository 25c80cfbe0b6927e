#include "stabtree/configuration.hpp"

namespace stabtree {

bool valid_configuration(const Configuration& c) {
  return c.graph && c.states.size() == c.graph->id_bound();
}

std::uint64_t digest(const Configuration& c) {
  std::uint64_t h = c.graph ? c.graph->structure_digest() : 0;
  auto mix = [&h](std::uint64_t x) {
    h ^= x + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  };
  if (!c.graph) return h;
  for (NodeId v = 0; v < c.graph->id_bound(); ++v) {
    if (!c.graph->present(v)) continue;
    const NodeState& s = c.states[v];
    mix(v);
    mix(s.parent ? *s.parent + 1 : 0);
    mix(static_cast<std::uint64_t>(s.status));
    mix(s.level);
    mix(s.new_level);
  }
  return h;
}

LocalView local_view(const Configuration& c, NodeId v, const EdgeSet* filter) {
  const DynamicGraph& g = *c.graph;
  LocalView view;
  view.is_root = v == g.root();
  view.self = c.states[v];
  for (const auto& a : g.neighbors(v)) {
    if (filter && !filter->contains(v, a.peer)) continue;
    const NodeState& ns = c.states[a.peer];
    bool points_here = false;
    if (ns.parent) {
      // The neighbor's parent port designates `v` iff it maps to this edge.
      auto back = g.peer(a.peer, *ns.parent);
      points_here = back && *back == v;
    }
    view.neighbors.push_back({a.port, ns.level, ns.status, ns.new_level, points_here});
  }
  return view;
}

}  // namespace stabtree
