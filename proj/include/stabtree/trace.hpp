#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "stabtree/configuration.hpp"
#include "stabtree/graph.hpp"
#include "stabtree/types.hpp"

namespace stabtree {

struct Firing {
  NodeId node = 0;
  Rule rule = Rule::InitRoot;

  friend bool operator==(const Firing&, const Firing&) = default;
};

struct StepRecord {
  std::uint64_t step = 0;
  std::vector<TopologyEvent> events;  // applied before this step's firings
  std::vector<Firing> firings;        // ascending node id
  std::uint64_t digest = 0;           // configuration digest after the step
};

// Ordered record of one computation. `snapshots[i]` is the configuration
// after `steps[i]` (present only when the run recorded configurations).
struct ExecutionTrace {
  Configuration initial;
  Configuration final_config;
  std::vector<StepRecord> steps;
  std::vector<Configuration> snapshots;
  std::vector<std::uint64_t> round_ends;  // step index closing each round
  bool recorded = false;
  bool budget_exceeded = false;
  std::uint64_t steps_executed = 0;  // steps in which at least one node fired
};

// Number of complete rounds: minimal segments in which every node privileged
// at the segment start fires or becomes unprivileged.
inline std::size_t rounds(const ExecutionTrace& t) { return t.round_ends.size(); }

using NodeNamer = std::function<std::string(NodeId)>;

NodeNamer default_namer();

void print_trace(std::ostream& os, const ExecutionTrace& t, bool full_states,
                 const NodeNamer& name = default_namer());

}  // namespace stabtree
