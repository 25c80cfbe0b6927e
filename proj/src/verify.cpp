#include "stabtree/verify.hpp"

#include <algorithm>
#include <deque>
#include <ostream>
#include <sstream>

#include "stabtree/protocol.hpp"

namespace stabtree {

void print_verdict(std::ostream& os, std::string_view name, const Verdict& v) {
  os << "VERDICT " << name << ' ' << (v.holds ? "true" : "false");
  if (!v.holds) os << " witness=" << v.witness;
  os << '\n';
}

namespace {

// Node the parent register resolves to, if it names a current neighbor.
std::optional<NodeId> parent_node(const Configuration& c, NodeId v) {
  const NodeState& s = c.states[v];
  if (!s.parent) return std::nullopt;
  return c.graph->peer(v, *s.parent);
}

}  // namespace

Verdict loop_free(const Configuration& c) {
  const DynamicGraph& g = *c.graph;
  // Out-degree is at most one, so chain-walking with three colors suffices.
  enum : std::uint8_t { kFresh, kOnChain, kDone };
  std::vector<std::uint8_t> mark(g.id_bound(), kFresh);
  for (NodeId start = 0; start < g.id_bound(); ++start) {
    if (!g.present(start) || mark[start] != kFresh) continue;
    NodeId v = start;
    std::vector<NodeId> chain;
    while (true) {
      if (mark[v] == kOnChain) {
        // Walked back into the current chain: report the cycle part.
        std::ostringstream w;
        w << "cycle:[";
        auto at = std::find(chain.begin(), chain.end(), v);
        for (auto it = at; it != chain.end(); ++it) {
          if (it != at) w << ',';
          w << *it;
        }
        w << ']';
        return Verdict::fail(w.str());
      }
      if (mark[v] == kDone) break;
      mark[v] = kOnChain;
      chain.push_back(v);
      if (v == g.root()) break;
      auto p = parent_node(c, v);
      if (!p) break;
      v = *p;
    }
    for (NodeId u : chain) mark[u] = kDone;
  }
  return Verdict::ok();
}

std::vector<Level> bfs_oracle(const DynamicGraph& g) {
  std::vector<Level> dist(g.id_bound(), 0);
  std::vector<bool> seen(g.id_bound(), false);
  std::deque<NodeId> queue{g.root()};
  seen[g.root()] = true;
  while (!queue.empty()) {
    NodeId v = queue.front();
    queue.pop_front();
    for (const auto& a : g.neighbors(v)) {
      if (!seen[a.peer]) {
        seen[a.peer] = true;
        dist[a.peer] = dist[v] + 1;
        queue.push_back(a.peer);
      }
    }
  }
  return dist;
}

Verdict legitimate(const Configuration& c, bool strict) {
  const DynamicGraph& g = *c.graph;
  const auto dist = bfs_oracle(g);
  for (NodeId v : g.nodes()) {
    const NodeState& s = c.states[v];
    std::ostringstream w;
    if (v == g.root()) {
      if (s.parent || s.level != 0 || s.new_level != 0 || s.status != Status::N) {
        w << "root " << v << " registers not (none,N,0,0)";
        return Verdict::fail(w.str());
      }
      continue;
    }
    if (s.status != Status::N) {
      w << "node " << v << " has status P";
      return Verdict::fail(w.str());
    }
    if (s.level != dist[v]) {
      w << "node " << v << " level " << s.level << " != distance " << dist[v];
      return Verdict::fail(w.str());
    }
    auto p = parent_node(c, v);
    if (!p) {
      w << "node " << v << " has no parent in its neighborhood";
      return Verdict::fail(w.str());
    }
    if (s.level != c.states[*p].level + 1) {
      w << "node " << v << " level " << s.level << " != parent level + 1";
      return Verdict::fail(w.str());
    }
    if (strict && s.new_level != s.level) {
      w << "node " << v << " new_level " << s.new_level << " != level " << s.level;
      return Verdict::fail(w.str());
    }
  }
  return Verdict::ok();
}

Verdict coherent(const Configuration& c) {
  const DynamicGraph& g = *c.graph;
  for (NodeId v : g.nodes()) {
    const NodeState& s = c.states[v];
    std::ostringstream w;
    if (v == g.root()) {
      if (s.level != 0 || s.status != Status::N) {
        w << "root level/status not (0,N)";
        return Verdict::fail(w.str());
      }
      continue;
    }
    auto p = parent_node(c, v);
    if (!p) continue;  // orphans are exempt
    if (c.states[*p].level + 1 > s.level) {
      w << "node " << v << ": parent level + 1 > level";
      return Verdict::fail(w.str());
    }
    if (s.new_level < s.level) {
      w << "node " << v << ": new_level " << s.new_level << " < level " << s.level;
      return Verdict::fail(w.str());
    }
  }
  return Verdict::ok();
}

Configuration legitimate_configuration(std::shared_ptr<const DynamicGraph> g) {
  const auto dist = bfs_oracle(*g);
  Configuration c;
  c.states.resize(g->id_bound());
  for (NodeId v : g->nodes()) {
    NodeState s;
    if (v != g->root()) {
      // Smallest port into the previous BFS layer, the stable parent choice.
      for (const auto& a : g->neighbors(v)) {
        if (dist[a.peer] + 1 == dist[v]) {
          s.parent = a.port;
          break;
        }
      }
      s.level = dist[v];
      s.new_level = dist[v];
    }
    c.states[v] = s;
  }
  c.graph = std::move(g);
  return c;
}

std::vector<NodeId> detached_subtree(const Configuration& pre_event, const TopologyEvent& e) {
  const DynamicGraph& g = *pre_event.graph;
  std::vector<NodeId> roots;
  switch (e.kind) {
    case EventKind::CrashEdge: {
      auto pu = parent_node(pre_event, e.u);
      auto pv = parent_node(pre_event, e.v);
      if (pv && *pv == e.u) {
        roots.push_back(e.v);
      } else if (pu && *pu == e.v) {
        roots.push_back(e.u);
      }
      break;  // a non-tree edge detaches nothing
    }
    case EventKind::CrashNode: {
      for (const auto& a : g.neighbors(e.u)) {
        auto p = parent_node(pre_event, a.peer);
        if (p && *p == e.u) roots.push_back(a.peer);
      }
      break;
    }
    default:
      throw PreconditionViolated("detached_subtree: event is not a crash");
  }
  // Collect descendants over the pre-event parent pointers.
  std::vector<bool> in(g.id_bound(), false);
  for (NodeId r : roots) in[r] = true;
  bool grew = true;
  while (grew) {
    grew = false;
    for (NodeId v : g.nodes()) {
      if (in[v]) continue;
      auto p = parent_node(pre_event, v);
      if (p && in[*p]) {
        in[v] = true;
        grew = true;
      }
    }
  }
  std::vector<NodeId> out;
  for (NodeId v : g.nodes()) {
    if (in[v]) out.push_back(v);
  }
  return out;
}

Verdict passage_holds(const ExecutionTrace& t, const TopologyEvent& e) {
  if (!t.recorded) throw PreconditionViolated("passage_holds: trace has no snapshots");
  if (!is_crash_event(e)) throw PreconditionViolated("passage_holds: event outside the crash class");
  if (!legitimate(t.initial).holds) {
    throw PreconditionViolated("passage_holds: trace does not start legitimate");
  }
  std::size_t event_at = t.steps.size();
  std::size_t total_events = 0;
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    total_events += t.steps[i].events.size();
    for (const auto& ev : t.steps[i].events) {
      if (ev == e) event_at = i;
    }
  }
  if (event_at == t.steps.size() || total_events != 1) {
    throw PreconditionViolated("passage_holds: event is not the trace's unique event");
  }

  const Configuration& pre = event_at == 0 ? t.initial : t.snapshots[event_at - 1];
  const auto detached = detached_subtree(pre, e);
  std::vector<bool> allowed(pre.graph->id_bound(), false);
  for (NodeId v : detached) allowed[v] = true;

  const Configuration* prev = &pre;
  for (std::size_t i = event_at; i < t.steps.size(); ++i) {
    const Configuration& cur = t.snapshots[i];
    const std::uint32_t bound = std::min<std::uint32_t>(
        prev->graph->id_bound(), cur.graph->id_bound());
    for (NodeId v = 0; v < bound; ++v) {
      if (!prev->graph->present(v) || !cur.graph->present(v)) continue;
      if (prev->states[v].parent != cur.states[v].parent && !(v < allowed.size() && allowed[v])) {
        std::ostringstream w;
        w << "node " << v << " changed parent at step " << t.steps[i].step
          << " outside the detached subtree";
        return Verdict::fail(w.str());
      }
    }
    prev = &cur;
  }
  return Verdict::ok();
}

}  // namespace stabtree
