#include "stabtree/trace.hpp"

#include <ostream>

#include "stabtree/protocol.hpp"

namespace stabtree {

NodeNamer default_namer() {
  return [](NodeId v) { return std::to_string(v); };
}

namespace {

void print_event(std::ostream& os, const TopologyEvent& e, const NodeNamer& name) {
  os << "event " << event_kind_name(e.kind);
  switch (e.kind) {
    case EventKind::CrashEdge:
      os << ' ' << name(e.u) << ' ' << name(e.v);
      break;
    case EventKind::RecovEdge:
      os << ' ' << name(e.u) << ' ' << name(e.v) << ' ' << e.weight;
      break;
    case EventKind::CrashNode:
      os << ' ' << name(e.u);
      break;
    case EventKind::RecovNode:
      os << ' ' << name(e.u);
      for (const auto& [peer, w] : e.adjacency) os << ' ' << name(peer) << ':' << w;
      break;
  }
}

void print_states(std::ostream& os, const Configuration& c, const NodeNamer& name) {
  for (NodeId v = 0; v < c.graph->id_bound(); ++v) {
    if (!c.graph->present(v)) continue;
    const NodeState& s = c.states[v];
    os << "state " << name(v) << " parent=";
    if (s.parent) {
      os << *s.parent;
    } else {
      os << "none";
    }
    os << " status=" << status_char(s.status) << " level=" << s.level
       << " newlevel=" << s.new_level << '\n';
  }
}

}  // namespace

void print_trace(std::ostream& os, const ExecutionTrace& t, bool full_states,
                 const NodeNamer& name) {
  std::size_t round = 0;
  std::size_t next_round = 0;
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const StepRecord& rec = t.steps[i];
    os << "step " << rec.step;
    for (const auto& e : rec.events) {
      os << ' ';
      print_event(os, e, name);
    }
    if (!rec.firings.empty()) {
      os << " fired";
      for (const auto& f : rec.firings) os << ' ' << name(f.node) << ':' << rule_name(f.rule);
    }
    os << '\n';
    if (full_states && t.recorded && i < t.snapshots.size()) {
      print_states(os, t.snapshots[i], name);
    }
    while (next_round < t.round_ends.size() && t.round_ends[next_round] == rec.step) {
      os << "round " << round << " ends at step " << rec.step << '\n';
      ++round;
      ++next_round;
    }
  }
  if (t.budget_exceeded) os << "budget exceeded\n";
}

}  // namespace stabtree
