#pragma once

#include <cstdint>
#include <memory>

#include "stabtree/daemon.hpp"
#include "stabtree/graph.hpp"

namespace stabtree {

// Connected random graph on n nodes with root 0: a random attachment tree
// plus extra edges with probability `extra_edge_prob`, weights uniform in
// [w_lo, w_hi]. Deterministic in the seed.
DynamicGraph random_connected_graph(std::uint32_t n, std::uint64_t seed,
                                    double extra_edge_prob = 0.25, Weight w_lo = 1.0,
                                    Weight w_hi = 10.0);

// A random crash event (edge or node) that keeps the graph connected and
// spares the root. Requires at least two nodes.
TopologyEvent random_crash_event(const DynamicGraph& g, Rng& rng, std::uint64_t at_step = 0);

}  // namespace stabtree
