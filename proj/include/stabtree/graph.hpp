#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stabtree/types.hpp"

namespace stabtree {

// One incident edge as seen from a node: local label, other endpoint, weight.
struct Adj {
  Port port = 0;
  NodeId peer = 0;
  Weight weight = 0;
};

struct EdgeSpec {
  NodeId u = 0;
  NodeId v = 0;
  Weight w = 1.0;
};

enum class EventKind : std::uint8_t { CrashEdge, RecovEdge, CrashNode, RecovNode };

const char* event_kind_name(EventKind k);

struct TopologyEvent {
  EventKind kind = EventKind::CrashEdge;
  std::uint64_t at_step = 0;
  NodeId u = 0;
  NodeId v = 0;       // second endpoint for edge events
  Weight weight = 0;  // recov_edge
  std::vector<std::pair<NodeId, Weight>> adjacency;  // recov_node

  friend bool operator==(const TopologyEvent&, const TopologyEvent&) = default;
};

inline bool is_crash_event(const TopologyEvent& e) {
  return e.kind == EventKind::CrashEdge || e.kind == EventKind::CrashNode;
}

enum class EventErrorKind { DisconnectingEvent, RootCrash, MissingSubject, DuplicateEdge };

class EventError : public std::runtime_error {
 public:
  EventError(EventErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  EventErrorKind kind() const { return kind_; }

 private:
  EventErrorKind kind_;
};

// Weighted undirected graph with a distinguished root and per-node stable
// port labels. Values are immutable once built: apply_event returns a new
// snapshot and never touches the receiver, so snapshots can be shared freely.
//
// Port labels never move: a surviving edge keeps its label at both endpoints
// across any event, and a new edge gets one more than the largest label the
// endpoint has ever handed out.
class DynamicGraph {
 public:
  DynamicGraph(NodeId root, std::uint32_t node_count, std::span<const EdgeSpec> edges);

  NodeId root() const { return root_; }
  // One past the largest node id ever allocated (crashed ids stay reserved).
  std::uint32_t id_bound() const { return static_cast<std::uint32_t>(nodes_.size()); }
  bool present(NodeId v) const { return v < nodes_.size() && nodes_[v].present; }
  std::size_t node_count() const { return present_count_; }
  std::size_t edge_count() const { return edge_count_; }

  // Incident edges sorted by port label.
  std::span<const Adj> neighbors(NodeId v) const;
  std::optional<NodeId> peer(NodeId v, Port p) const;
  std::optional<Port> port_between(NodeId v, NodeId u) const;
  bool has_edge(NodeId u, NodeId v) const { return port_between(u, v).has_value(); }
  std::size_t degree(NodeId v) const { return neighbors(v).size(); }

  std::vector<NodeId> nodes() const;  // present ids, ascending
  std::vector<EdgeSpec> edges() const;  // u < v, ascending

  // Applies one topology change and returns the resulting snapshot.
  // Throws EventError; the receiver is left untouched.
  DynamicGraph apply_event(const TopologyEvent& e) const;

  std::uint64_t structure_digest() const;

 private:
  struct NodeRec {
    bool present = false;
    Port next_port = 1;  // monotone, never reset
    std::vector<Adj> adj;  // sorted by port
  };

  DynamicGraph() = default;
  void add_edge(NodeId u, NodeId v, Weight w);
  void remove_edge(NodeId u, NodeId v);

  NodeId root_ = 0;
  std::size_t edge_count_ = 0;
  std::size_t present_count_ = 0;
  std::vector<NodeRec> nodes_;
};

// True iff every present node is reachable from the root.
bool is_connected(const DynamicGraph& g);

// Sorted set of undirected edges, stored as normalized (min,max) id pairs.
class EdgeSet {
 public:
  EdgeSet() = default;
  static EdgeSet from_pairs(std::vector<std::pair<NodeId, NodeId>> pairs);

  bool contains(NodeId u, NodeId v) const;
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  std::span<const std::pair<NodeId, NodeId>> pairs() const { return pairs_; }

  friend bool operator==(const EdgeSet&, const EdgeSet&) = default;

 private:
  std::vector<std::pair<NodeId, NodeId>> pairs_;
};

}  // namespace stabtree
