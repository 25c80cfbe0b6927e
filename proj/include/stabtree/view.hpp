#pragma once

#include <vector>

#include "stabtree/types.hpp"

namespace stabtree {

// What a node can read about one neighbor: the neighbor's shared registers
// plus whether the neighbor's parent pointer designates this node. Neighbors
// are identified by local port label only; the network is anonymous.
struct NeighborView {
  Port port = 0;
  Level level = 0;
  Status status = Status::N;
  Level new_level = 0;
  bool points_here = false;

  friend bool operator==(const NeighborView&, const NeighborView&) = default;
};

// Everything a rule evaluation may consult. Pure data; building one is the
// engine's job.
struct LocalView {
  bool is_root = false;
  NodeState self;
  std::vector<NeighborView> neighbors;  // ascending port

  const NeighborView* find(Port p) const {
    for (const auto& nb : neighbors) {
      if (nb.port == p) return &nb;
    }
    return nullptr;
  }
};

}  // namespace stabtree
