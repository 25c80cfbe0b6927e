#include "stabtree/compose.hpp"

#include <algorithm>
#include <string>

#include "stabtree/protocol.hpp"
#include "stabtree/verify.hpp"

namespace stabtree {

const char* slave_kind_name(SlaveKind k) {
  switch (k) {
    case SlaveKind::OracleMaxflow: return "oracle-maxflow";
    case SlaveKind::OracleMinDegree: return "oracle-mindegree";
    case SlaveKind::DistributedMaxflow: return "distributed-maxflow";
  }
  return "?";
}

std::optional<SlaveKind> parse_slave_kind(std::string_view name) {
  if (name == "oracle-maxflow") return SlaveKind::OracleMaxflow;
  if (name == "oracle-mindegree") return SlaveKind::OracleMinDegree;
  if (name == "distributed-maxflow") return SlaveKind::DistributedMaxflow;
  return std::nullopt;
}

std::uint64_t digest(const ComposedConfiguration& c) {
  std::uint64_t h = digest(c.master);
  auto mix = [&h](std::uint64_t x) {
    h ^= x + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  };
  for (NodeId v = 0; v < c.master.graph->id_bound(); ++v) {
    if (!c.master.graph->present(v)) continue;
    const FlowState& f = c.slave[v];
    std::uint64_t wbits;
    __builtin_memcpy(&wbits, &f.flow, sizeof(wbits));
    mix(wbits);
    mix(f.parent ? *f.parent + 1 : 0);
    mix(f.hops);
  }
  return h;
}

EdgeSet slave_output(const ComposedConfiguration& c, SlaveKind kind) {
  const DynamicGraph& g = *c.master.graph;
  switch (kind) {
    case SlaveKind::OracleMaxflow:
      return widest_path_tree(g);
    case SlaveKind::OracleMinDegree:
      return min_degree_tree_oracle(g).edges;
    case SlaveKind::DistributedMaxflow: {
      std::vector<std::pair<NodeId, NodeId>> pairs;
      for (NodeId v : g.nodes()) {
        if (v == g.root()) continue;
        const FlowState& f = c.slave[v];
        if (!f.parent) continue;
        if (auto peer = g.peer(v, *f.parent)) pairs.emplace_back(v, *peer);
      }
      return EdgeSet::from_pairs(std::move(pairs));
    }
  }
  return {};
}

SlaveView slave_view(const ComposedConfiguration& c, NodeId v) {
  const DynamicGraph& g = *c.master.graph;
  SlaveView view;
  view.is_root = v == g.root();
  view.self = c.slave[v];
  view.hop_budget = static_cast<std::uint32_t>(g.node_count());
  for (const auto& a : g.neighbors(v)) {
    view.neighbors.push_back({a.port, a.weight, c.slave[a.peer].flow, c.slave[a.peer].hops});
  }
  return view;
}

FlowState slave_rule_target(const SlaveView& view) {
  if (view.is_root) return {kTopFlow, std::nullopt, 0};
  FlowState best{0, std::nullopt, 0};
  for (const auto& nb : view.neighbors) {  // ascending port: first max wins
    if (nb.hops + 1 > view.hop_budget) continue;  // stale chain, distrust it
    const Weight flow = std::min(nb.flow, nb.weight);
    if (flow > best.flow) best = {flow, nb.port, nb.hops + 1};
  }
  return best;
}

namespace {

// Enabled actions across both layers; oracle slaves contribute none.
std::vector<NodeActions> composed_privileged(const ComposedConfiguration& c, SlaveKind kind,
                                             const EdgeSet& s_a) {
  std::vector<NodeActions> out;
  const DynamicGraph& g = *c.master.graph;
  for (NodeId v = 0; v < g.id_bound(); ++v) {
    if (!g.present(v)) continue;
    std::uint8_t bits = enabled_rules(filtered_view(c.master, v, s_a)).bits();
    if (kind == SlaveKind::DistributedMaxflow && slave_rule_enabled(slave_view(c, v))) {
      bits |= 1u << kSlaveAction;
    }
    if (bits) out.push_back({v, bits});
  }
  return out;
}

std::pair<ComposedConfiguration, std::vector<ComposedFiring>> fire(
    const ComposedConfiguration& c, const EdgeSet& s_a,
    const std::vector<std::pair<NodeId, int>>& picks) {
  ComposedConfiguration next = c;
  std::vector<ComposedFiring> firings;
  firings.reserve(picks.size());
  for (const auto& [v, action] : picks) {
    if (action == kSlaveAction) {
      next.slave[v] = slave_rule_target(slave_view(c, v));
      firings.push_back({v, true, Rule::InitRoot});
    } else {
      const Rule r = static_cast<Rule>(action);
      next.master.states[v] = apply_rule(r, filtered_view(c.master, v, s_a));
      firings.push_back({v, false, r});
    }
  }
  return {std::move(next), std::move(firings)};
}

}  // namespace

std::pair<ComposedConfiguration, std::vector<ComposedFiring>> composed_step(
    const ComposedConfiguration& c, DaemonRuntime& d, SlaveKind kind) {
  const EdgeSet s_a = slave_output(c, kind);
  auto privileged = composed_privileged(c, kind, s_a);
  if (privileged.empty()) return {c, {}};
  return fire(c, s_a, d.select(privileged));
}

ComposedTrace composed_run(const ComposedConfiguration& c0, const Daemon& daemon, SlaveKind kind,
                           std::vector<TopologyEvent> events, const ComposedRunOptions& opts) {
  std::stable_sort(events.begin(), events.end(),
                   [](const TopologyEvent& a, const TopologyEvent& b) {
                     return a.at_step < b.at_step;
                   });
  ComposedTrace trace;
  trace.initial = c0;
  trace.recorded = opts.record;

  DaemonRuntime runtime(daemon);
  ComposedConfiguration cur = c0;
  std::uint64_t now = 0;
  std::size_t ev_idx = 0;

  // Round bookkeeping over the union of both layers' privileges.
  bool round_active = false;
  std::vector<NodeId> remaining;
  std::uint64_t last_exec_step = 0;

  auto push_record = [&](ComposedStepRecord rec, const ComposedConfiguration& cfg) {
    if (opts.record) trace.snapshots.push_back(cfg);
    if (opts.observer) opts.observer(cfg, rec);
    trace.steps.push_back(std::move(rec));
  };

  while (true) {
    std::vector<TopologyEvent> applied_now;
    while (ev_idx < events.size() && events[ev_idx].at_step <= now) {
      const TopologyEvent& e = events[ev_idx];
      Configuration master = apply_event_to_configuration(cur.master, e);
      cur.slave.resize(master.graph->id_bound());
      if (e.kind == EventKind::CrashNode || e.kind == EventKind::RecovNode) {
        cur.slave[e.u] = FlowState{};
      }
      cur.master = std::move(master);
      applied_now.push_back(e);
      ++ev_idx;
    }

    const EdgeSet s_a = slave_output(cur, kind);
    auto privileged = composed_privileged(cur, kind, s_a);
    std::vector<NodeId> priv_ids;
    priv_ids.reserve(privileged.size());
    for (const auto& na : privileged) priv_ids.push_back(na.node);
    if (round_active) {
      std::vector<NodeId> keep;
      std::set_intersection(remaining.begin(), remaining.end(), priv_ids.begin(), priv_ids.end(),
                            std::back_inserter(keep));
      remaining = std::move(keep);
      if (remaining.empty()) {
        trace.round_ends.push_back(last_exec_step);
        round_active = false;
      }
    }
    if (!round_active && !priv_ids.empty()) {
      remaining = priv_ids;
      round_active = true;
    }

    const bool pending = ev_idx < events.size();
    const bool stopped = !pending && opts.stop && opts.stop(cur);
    if (stopped || privileged.empty()) {
      if (!applied_now.empty()) {
        push_record({now, std::move(applied_now), {}, digest(cur)}, cur);
      }
      if (stopped || !pending) break;
      now = events[ev_idx].at_step;
      continue;
    }
    if (now >= opts.max_steps) {
      if (!applied_now.empty()) {
        push_record({now, std::move(applied_now), {}, digest(cur)}, cur);
      }
      trace.budget_exceeded = true;
      break;
    }

    auto [next, firings] = fire(cur, s_a, runtime.select(privileged));
    std::vector<NodeId> fired_ids;
    fired_ids.reserve(firings.size());
    for (const auto& f : firings) fired_ids.push_back(f.node);
    ++trace.steps_executed;
    last_exec_step = now;
    push_record({now, std::move(applied_now), std::move(firings), digest(next)}, next);
    if (round_active) {
      std::vector<NodeId> keep;
      std::set_difference(remaining.begin(), remaining.end(), fired_ids.begin(), fired_ids.end(),
                          std::back_inserter(keep));
      remaining = std::move(keep);
      if (remaining.empty()) {
        trace.round_ends.push_back(now);
        round_active = false;
      }
    }
    cur = std::move(next);
    ++now;
  }

  trace.final_config = std::move(cur);
  return trace;
}

ComposedConfiguration random_composed_configuration(std::shared_ptr<const DynamicGraph> g,
                                                    std::uint64_t seed) {
  ComposedConfiguration c;
  c.master = random_configuration(g, seed);
  const DynamicGraph& graph = *c.master.graph;
  Rng rng(seed ^ 0x51abe5eedull);
  Weight max_w = 1.0;
  for (const auto& e : graph.edges()) max_w = std::max(max_w, e.w);
  c.slave.resize(graph.id_bound());
  const std::uint32_t n = static_cast<std::uint32_t>(graph.node_count());
  for (NodeId v : graph.nodes()) {
    FlowState f;
    f.flow = rng.coin() ? rng.real(0.0, 2.0 * max_w) : (rng.coin() ? kTopFlow : 0.0);
    auto nbs = graph.neighbors(v);
    const std::uint32_t pick = rng.below(static_cast<std::uint32_t>(nbs.size()) + 1);
    if (pick < nbs.size()) f.parent = nbs[pick].port;
    f.hops = rng.below(n + 1);
    c.slave[v] = f;
  }
  return c;
}

}  // namespace stabtree
