#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "stabtree/configuration.hpp"
#include "stabtree/daemon.hpp"
#include "stabtree/graph.hpp"
#include "stabtree/trace.hpp"
#include "stabtree/types.hpp"

namespace stabtree {

// Enabled actions of one node. Bits 0..5 are the master rules; bit 6 is the
// slave action used by composed runs.
inline constexpr int kActionCount = 7;
inline constexpr int kSlaveAction = 6;

struct NodeActions {
  NodeId node = 0;
  std::uint8_t bits = 0;
};

// Mutable daemon: the Daemon value plus scheduling state (RNG, enabled-age
// bookkeeping for constructive weak fairness, per-node layer alternation).
class DaemonRuntime {
 public:
  explicit DaemonRuntime(Daemon spec);

  const Daemon& spec() const { return spec_; }

  // Picks the nodes to fire this step and one enabled action for each.
  // `privileged` must be nonempty and sorted by node id; every bits field is
  // nonzero. Ages are updated as a side effect.
  std::vector<std::pair<NodeId, int>> select(const std::vector<NodeActions>& privileged);

 private:
  int choose_action(const NodeActions& na, bool forced);

  Daemon spec_;
  Rng rng_;
  std::vector<std::array<std::uint32_t, kActionCount>> ages_;
  std::vector<std::uint8_t> last_layer_;  // 0 = master fired last, 1 = slave
  NodeId central_cursor_ = 0;             // round-robin position
};

// Enabled rule sets of all privileged nodes in `c`, ascending node id.
std::vector<NodeActions> privileged_nodes(const Configuration& c);

struct StepResult {
  Configuration config;
  std::vector<Firing> firings;
};

// One daemon step with atomic-snapshot semantics: every selected node reads
// the pre-step configuration. Returns `c` unchanged with no firings when no
// node is privileged.
StepResult step(const Configuration& c, DaemonRuntime& d);

// Graph event applied to a configuration: crashed nodes lose their state
// entry, recovered nodes start from the default register values.
Configuration apply_event_to_configuration(const Configuration& c, const TopologyEvent& e);

struct RunOptions {
  std::uint64_t max_steps = 100000;
  bool record = false;  // keep per-step configuration snapshots
  // Checked between steps once every scheduled event has been applied.
  std::function<bool(const Configuration&)> stop;
  // Called after every executed or event-only step.
  std::function<void(const Configuration&, const StepRecord&)> observer;
};

// Drives the configuration until the stop predicate holds, no rule is
// enabled and no event is pending, or the step budget runs out
// (budget_exceeded is reported on the trace, not thrown).
ExecutionTrace run(const Configuration& c0, const Daemon& daemon,
                   std::vector<TopologyEvent> events, const RunOptions& opts = {});

// Independently random registers per node: parent uniform over ports plus
// bottom, status uniform, level and new_level uniform in [0, 2n].
Configuration random_configuration(std::shared_ptr<const DynamicGraph> g, std::uint64_t seed);

}  // namespace stabtree
