#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "stabtree/configuration.hpp"
#include "stabtree/daemon.hpp"
#include "stabtree/engine.hpp"
#include "stabtree/graph.hpp"
#include "stabtree/types.hpp"
#include "stabtree/verify.hpp"

// Fair composition: a slave protocol outputs an edge set; the BFS master
// runs on the neighborhood filtered to that set, which makes the stable
// master tree optimize the slave's metric while staying loop-free.

namespace stabtree {

enum class SlaveKind : std::uint8_t { OracleMaxflow, OracleMinDegree, DistributedMaxflow };

const char* slave_kind_name(SlaveKind k);
std::optional<SlaveKind> parse_slave_kind(std::string_view name);

// Registers of the distributed widest-path slave. `hops` bounds the length
// of the support chain a flow claim rides on.
struct FlowState {
  Weight flow = 0;
  std::optional<Port> parent;
  std::uint32_t hops = 0;

  friend bool operator==(const FlowState&, const FlowState&) = default;
};

struct ComposedConfiguration {
  Configuration master;
  std::vector<FlowState> slave;  // indexed by node id, like master.states
};

std::uint64_t digest(const ComposedConfiguration& c);

// Edge set the slave currently outputs. Oracle slaves answer from the graph
// itself; the distributed slave answers from its flow-parent pointers.
EdgeSet slave_output(const ComposedConfiguration& c, SlaveKind kind);

// Master view restricted to the slave's output edges.
inline LocalView filtered_view(const Configuration& c, NodeId v, const EdgeSet& s) {
  return local_view(c, v, &s);
}

struct SlaveNeighborView {
  Port port = 0;
  Weight weight = 0;
  Weight flow = 0;
  std::uint32_t hops = 0;
};

struct SlaveView {
  bool is_root = false;
  FlowState self;
  std::vector<SlaveNeighborView> neighbors;  // ascending port
  std::uint32_t hop_budget = 0;              // network size n
};

SlaveView slave_view(const ComposedConfiguration& c, NodeId v);

// Desired register value under the distributed widest-path rule: best
// min(flow, edge weight) over neighbors whose chain still fits the hop
// budget, smallest achieving port; flows whose chain would exceed the budget
// collapse to the bottom sentinel.
FlowState slave_rule_target(const SlaveView& view);
inline bool slave_rule_enabled(const SlaveView& view) {
  return !(view.self == slave_rule_target(view));
}

struct ComposedFiring {
  NodeId node = 0;
  bool slave_layer = false;
  Rule rule = Rule::InitRoot;  // meaningful when !slave_layer

  friend bool operator==(const ComposedFiring&, const ComposedFiring&) = default;
};

struct ComposedStepRecord {
  std::uint64_t step = 0;
  std::vector<TopologyEvent> events;
  std::vector<ComposedFiring> firings;
  std::uint64_t digest = 0;
};

struct ComposedTrace {
  ComposedConfiguration initial;
  ComposedConfiguration final_config;
  std::vector<ComposedStepRecord> steps;
  std::vector<ComposedConfiguration> snapshots;
  std::vector<std::uint64_t> round_ends;
  bool recorded = false;
  bool budget_exceeded = false;
  std::uint64_t steps_executed = 0;
};

inline std::size_t rounds(const ComposedTrace& t) { return t.round_ends.size(); }

// One fair-composition step: oracle slaves are refreshed for free, the
// distributed slave's update competes with the master rules under the same
// daemon. All selected nodes read the pre-step configuration.
std::pair<ComposedConfiguration, std::vector<ComposedFiring>> composed_step(
    const ComposedConfiguration& c, DaemonRuntime& d, SlaveKind kind);

struct ComposedRunOptions {
  std::uint64_t max_steps = 100000;
  bool record = false;
  std::function<bool(const ComposedConfiguration&)> stop;
  std::function<void(const ComposedConfiguration&, const ComposedStepRecord&)> observer;
};

ComposedTrace composed_run(const ComposedConfiguration& c0, const Daemon& daemon, SlaveKind kind,
                           std::vector<TopologyEvent> events, const ComposedRunOptions& opts = {});

// Random master registers plus random slave registers (flow in [0, max
// weight], uniform parent pointer, hops in [0, n]).
ComposedConfiguration random_composed_configuration(std::shared_ptr<const DynamicGraph> g,
                                                    std::uint64_t seed);

}  // namespace stabtree
