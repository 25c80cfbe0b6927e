#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "stabtree/graph.hpp"
#include "stabtree/types.hpp"
#include "stabtree/view.hpp"

namespace stabtree {

// Global system state: a graph snapshot plus one register set per node.
// `states` is indexed by node id and sized to graph->id_bound(); entries for
// absent ids are ignored.
struct Configuration {
  std::shared_ptr<const DynamicGraph> graph;
  std::vector<NodeState> states;
};

bool valid_configuration(const Configuration& c);

std::uint64_t digest(const Configuration& c);

// Builds the anonymous local view of `v`. With `filter` set, the
// neighborhood is restricted to edges contained in the filter set.
LocalView local_view(const Configuration& c, NodeId v, const EdgeSet* filter = nullptr);

}  // namespace stabtree
