#include "stabtree/engine.hpp"

#include <algorithm>
#include <stdexcept>

#include "stabtree/protocol.hpp"

namespace stabtree {

const char* daemon_kind_name(DaemonKind k) {
  switch (k) {
    case DaemonKind::Synchronous: return "synchronous";
    case DaemonKind::Central: return "central";
    case DaemonKind::Adversarial: return "adversarial";
  }
  return "?";
}

DaemonRuntime::DaemonRuntime(Daemon spec) : spec_(spec), rng_(spec.seed) {
  if (spec_.kind == DaemonKind::Adversarial && spec_.fairness_bound == 0) {
    throw std::invalid_argument("adversarial daemon needs a positive fairness bound");
  }
}

int DaemonRuntime::choose_action(const NodeActions& na, bool forced) {
  std::uint8_t bits = na.bits;
  const std::uint8_t master_bits = bits & 0x3f;
  const bool slave_enabled = (bits & (1u << kSlaveAction)) != 0;

  if (spec_.kind == DaemonKind::Adversarial) {
    if (forced && na.node < ages_.size()) {
      // Fire the most starved action first.
      int best = -1;
      std::uint32_t best_age = 0;
      for (int a = 0; a < kActionCount; ++a) {
        if ((bits & (1u << a)) && ages_[na.node][a] >= best_age) {
          best_age = ages_[na.node][a];
          best = a;
        }
      }
      if (best >= 0) return best;
    }
    int count = __builtin_popcount(bits);
    int pick = static_cast<int>(rng_.below(static_cast<std::uint32_t>(count)));
    for (int a = 0; a < kActionCount; ++a) {
      if (bits & (1u << a)) {
        if (pick == 0) return a;
        --pick;
      }
    }
  }

  // Deterministic policy: alternate layers when both have work, otherwise
  // the fixed master priority order.
  if (slave_enabled) {
    if (master_bits == 0) return kSlaveAction;
    if (na.node >= last_layer_.size() || last_layer_[na.node] != 1) return kSlaveAction;
  }
  if (master_bits == 0) return kSlaveAction;
  return __builtin_ctz(master_bits);
}

std::vector<std::pair<NodeId, int>> DaemonRuntime::select(
    const std::vector<NodeActions>& privileged) {
  if (privileged.empty()) return {};
  const NodeId max_id = privileged.back().node;
  if (ages_.size() <= max_id) ages_.resize(max_id + 1, {});
  if (last_layer_.size() <= max_id) last_layer_.resize(max_id + 1, 0);

  std::vector<std::pair<NodeId, bool>> chosen;  // (node, forced)
  switch (spec_.kind) {
    case DaemonKind::Synchronous:
      for (const auto& na : privileged) chosen.emplace_back(na.node, false);
      break;
    case DaemonKind::Central: {
      // Deterministic round-robin keeps the central daemon weakly fair: the
      // scan resumes past the last served node, so a continuously privileged
      // node is reached within one sweep.
      const NodeActions* pick = nullptr;
      for (const auto& na : privileged) {
        if (na.node >= central_cursor_) {
          pick = &na;
          break;
        }
      }
      if (!pick) pick = &privileged.front();
      central_cursor_ = pick->node + 1;
      chosen.emplace_back(pick->node, false);
      break;
    }
    case DaemonKind::Adversarial: {
      std::vector<NodeId> optional_picks;
      for (const auto& na : privileged) {
        bool forced = false;
        for (int a = 0; a < kActionCount; ++a) {
          if ((na.bits & (1u << a)) && ages_[na.node][a] + 1 >= spec_.fairness_bound) {
            forced = true;
            break;
          }
        }
        if (forced) {
          chosen.emplace_back(na.node, true);
        } else if (rng_.coin()) {
          optional_picks.push_back(na.node);
        }
      }
      for (NodeId v : optional_picks) chosen.emplace_back(v, false);
      if (chosen.empty()) {
        chosen.emplace_back(privileged[rng_.below(static_cast<std::uint32_t>(privileged.size()))].node,
                            false);
      }
      std::sort(chosen.begin(), chosen.end());
      break;
    }
  }

  std::vector<std::pair<NodeId, int>> firings;
  firings.reserve(chosen.size());
  std::size_t ci = 0;
  for (const auto& na : privileged) {
    while (ci < chosen.size() && chosen[ci].first < na.node) ++ci;
    const bool selected = ci < chosen.size() && chosen[ci].first == na.node;
    if (selected) {
      int action = choose_action(na, chosen[ci].second);
      firings.emplace_back(na.node, action);
      ages_[na.node] = {};
      last_layer_[na.node] = action == kSlaveAction ? 1 : 0;
    } else {
      for (int a = 0; a < kActionCount; ++a) {
        if (na.bits & (1u << a)) {
          ++ages_[na.node][a];
        } else {
          ages_[na.node][a] = 0;
        }
      }
    }
  }
  return firings;
}

std::vector<NodeActions> privileged_nodes(const Configuration& c) {
  std::vector<NodeActions> out;
  for (NodeId v = 0; v < c.graph->id_bound(); ++v) {
    if (!c.graph->present(v)) continue;
    RuleSet rs = enabled_rules(local_view(c, v));
    if (!rs.empty()) out.push_back({v, rs.bits()});
  }
  return out;
}

StepResult step(const Configuration& c, DaemonRuntime& d) {
  auto privileged = privileged_nodes(c);
  if (privileged.empty()) return {c, {}};
  auto picks = d.select(privileged);
  StepResult result{c, {}};
  result.firings.reserve(picks.size());
  for (const auto& [v, action] : picks) {
    Rule r = static_cast<Rule>(action);
    result.config.states[v] = apply_rule(r, local_view(c, v));
    result.firings.push_back({v, r});
  }
  return result;
}

Configuration apply_event_to_configuration(const Configuration& c, const TopologyEvent& e) {
  Configuration next;
  next.graph = std::make_shared<const DynamicGraph>(c.graph->apply_event(e));
  next.states = c.states;
  next.states.resize(next.graph->id_bound());
  if (e.kind == EventKind::CrashNode) next.states[e.u] = NodeState{};
  if (e.kind == EventKind::RecovNode) next.states[e.u] = NodeState{};
  return next;
}

namespace {

// Online round bookkeeping shared by run() and composed_run().
class RoundTracker {
 public:
  // Call with the privileged node ids of the configuration about to step.
  void begin_boundary(const std::vector<NodeId>& privileged,
                      std::vector<std::uint64_t>& round_ends) {
    if (active_) {
      filter_to(privileged, round_ends);
    }
    if (!active_ && !privileged.empty()) {
      remaining_ = privileged;
      active_ = true;
    }
  }

  void after_step(std::uint64_t step_index, const std::vector<NodeId>& fired,
                  std::vector<std::uint64_t>& round_ends) {
    last_step_ = step_index;
    if (!active_) return;
    std::vector<NodeId> keep;
    keep.reserve(remaining_.size());
    std::set_difference(remaining_.begin(), remaining_.end(), fired.begin(), fired.end(),
                        std::back_inserter(keep));
    remaining_ = std::move(keep);
    if (remaining_.empty()) {
      round_ends.push_back(step_index);
      active_ = false;
    }
  }

 private:
  void filter_to(const std::vector<NodeId>& privileged, std::vector<std::uint64_t>& round_ends) {
    std::vector<NodeId> keep;
    keep.reserve(remaining_.size());
    std::set_intersection(remaining_.begin(), remaining_.end(), privileged.begin(),
                          privileged.end(), std::back_inserter(keep));
    remaining_ = std::move(keep);
    if (remaining_.empty()) {
      round_ends.push_back(last_step_);
      active_ = false;
    }
  }

  bool active_ = false;
  std::vector<NodeId> remaining_;
  std::uint64_t last_step_ = 0;
};

}  // namespace

ExecutionTrace run(const Configuration& c0, const Daemon& daemon,
                   std::vector<TopologyEvent> events, const RunOptions& opts) {
  std::stable_sort(events.begin(), events.end(),
                   [](const TopologyEvent& a, const TopologyEvent& b) {
                     return a.at_step < b.at_step;
                   });
  ExecutionTrace trace;
  trace.initial = c0;
  trace.recorded = opts.record;

  DaemonRuntime runtime(daemon);
  RoundTracker tracker;
  Configuration cur = c0;
  std::uint64_t now = 0;
  std::size_t ev_idx = 0;

  auto push_record = [&](StepRecord rec, const Configuration& cfg) {
    if (opts.record) trace.snapshots.push_back(cfg);
    if (opts.observer) opts.observer(cfg, rec);
    trace.steps.push_back(std::move(rec));
  };

  while (true) {
    std::vector<TopologyEvent> applied_now;
    while (ev_idx < events.size() && events[ev_idx].at_step <= now) {
      cur = apply_event_to_configuration(cur, events[ev_idx]);
      applied_now.push_back(events[ev_idx]);
      ++ev_idx;
    }

    auto privileged = privileged_nodes(cur);
    std::vector<NodeId> priv_ids;
    priv_ids.reserve(privileged.size());
    for (const auto& na : privileged) priv_ids.push_back(na.node);
    tracker.begin_boundary(priv_ids, trace.round_ends);

    const bool pending = ev_idx < events.size();
    const bool stopped = !pending && opts.stop && opts.stop(cur);
    if (stopped || privileged.empty()) {
      if (!applied_now.empty()) {
        push_record({now, std::move(applied_now), {}, digest(cur)}, cur);
      }
      if (stopped || !pending) break;
      now = events[ev_idx].at_step;  // idle until the next scheduled event
      continue;
    }
    if (now >= opts.max_steps) {
      if (!applied_now.empty()) {
        push_record({now, std::move(applied_now), {}, digest(cur)}, cur);
      }
      trace.budget_exceeded = true;
      break;
    }

    auto picks = runtime.select(privileged);
    Configuration next = cur;
    std::vector<Firing> firings;
    std::vector<NodeId> fired_ids;
    firings.reserve(picks.size());
    for (const auto& [v, action] : picks) {
      Rule r = static_cast<Rule>(action);
      next.states[v] = apply_rule(r, local_view(cur, v));
      firings.push_back({v, r});
      fired_ids.push_back(v);
    }
    ++trace.steps_executed;
    push_record({now, std::move(applied_now), std::move(firings), digest(next)}, next);
    tracker.after_step(now, fired_ids, trace.round_ends);
    cur = std::move(next);
    ++now;
  }

  trace.final_config = std::move(cur);
  return trace;
}

Configuration random_configuration(std::shared_ptr<const DynamicGraph> g, std::uint64_t seed) {
  Rng rng(seed);
  Configuration c;
  c.states.resize(g->id_bound());
  const Level level_range = static_cast<Level>(2 * g->node_count()) + 1;
  for (NodeId v = 0; v < g->id_bound(); ++v) {
    if (!g->present(v)) continue;
    NodeState s;
    auto nbs = g->neighbors(v);
    const std::uint32_t pick = rng.below(static_cast<std::uint32_t>(nbs.size()) + 1);
    if (pick < nbs.size()) s.parent = nbs[pick].port;
    s.status = rng.coin() ? Status::P : Status::N;
    s.level = rng.below(level_range);
    s.new_level = rng.below(level_range);
    c.states[v] = s;
  }
  c.graph = std::move(g);
  return c;
}

}  // namespace stabtree
