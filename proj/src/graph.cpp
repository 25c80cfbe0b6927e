#include "stabtree/graph.hpp"

#include <algorithm>
#include <string>

namespace stabtree {

namespace {

std::string edge_str(NodeId u, NodeId v) {
  return "(" + std::to_string(u) + "," + std::to_string(v) + ")";
}

}  // namespace

const char* event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::CrashEdge: return "crash_edge";
    case EventKind::RecovEdge: return "recov_edge";
    case EventKind::CrashNode: return "crash_node";
    case EventKind::RecovNode: return "recov_node";
  }
  return "?";
}

DynamicGraph::DynamicGraph(NodeId root, std::uint32_t node_count,
                           std::span<const EdgeSpec> edges)
    : root_(root) {
  if (node_count == 0 || root >= node_count) {
    throw std::invalid_argument("graph: root outside node range");
  }
  nodes_.resize(node_count);
  for (auto& n : nodes_) n.present = true;
  present_count_ = node_count;
  for (const auto& e : edges) {
    if (e.u >= node_count || e.v >= node_count) {
      throw std::invalid_argument("graph: edge endpoint out of range");
    }
    if (e.u == e.v) throw std::invalid_argument("graph: self-loop " + edge_str(e.u, e.v));
    if (has_edge(e.u, e.v)) {
      throw std::invalid_argument("graph: duplicate edge " + edge_str(e.u, e.v));
    }
    if (!(e.w > 0)) throw std::invalid_argument("graph: non-positive weight on " + edge_str(e.u, e.v));
    add_edge(e.u, e.v, e.w);
  }
}

void DynamicGraph::add_edge(NodeId u, NodeId v, Weight w) {
  nodes_[u].adj.push_back({nodes_[u].next_port++, v, w});
  nodes_[v].adj.push_back({nodes_[v].next_port++, u, w});
  ++edge_count_;
}

void DynamicGraph::remove_edge(NodeId u, NodeId v) {
  auto drop = [](std::vector<Adj>& adj, NodeId peer) {
    adj.erase(std::remove_if(adj.begin(), adj.end(),
                             [peer](const Adj& a) { return a.peer == peer; }),
              adj.end());
  };
  drop(nodes_[u].adj, v);
  drop(nodes_[v].adj, u);
  --edge_count_;
}

std::span<const Adj> DynamicGraph::neighbors(NodeId v) const {
  static const std::vector<Adj> kEmpty;
  if (!present(v)) return kEmpty;
  return nodes_[v].adj;
}

std::optional<NodeId> DynamicGraph::peer(NodeId v, Port p) const {
  for (const auto& a : neighbors(v)) {
    if (a.port == p) return a.peer;
  }
  return std::nullopt;
}

std::optional<Port> DynamicGraph::port_between(NodeId v, NodeId u) const {
  for (const auto& a : neighbors(v)) {
    if (a.peer == u) return a.port;
  }
  return std::nullopt;
}

std::vector<NodeId> DynamicGraph::nodes() const {
  std::vector<NodeId> out;
  out.reserve(present_count_);
  for (NodeId v = 0; v < nodes_.size(); ++v) {
    if (nodes_[v].present) out.push_back(v);
  }
  return out;
}

std::vector<EdgeSpec> DynamicGraph::edges() const {
  std::vector<EdgeSpec> out;
  out.reserve(edge_count_);
  for (NodeId v = 0; v < nodes_.size(); ++v) {
    for (const auto& a : neighbors(v)) {
      if (v < a.peer) out.push_back({v, a.peer, a.weight});
    }
  }
  std::sort(out.begin(), out.end(), [](const EdgeSpec& a, const EdgeSpec& b) {
    return std::pair(a.u, a.v) < std::pair(b.u, b.v);
  });
  return out;
}

DynamicGraph DynamicGraph::apply_event(const TopologyEvent& e) const {
  DynamicGraph g = *this;
  switch (e.kind) {
    case EventKind::CrashEdge: {
      if (!g.present(e.u) || !g.present(e.v) || !g.has_edge(e.u, e.v)) {
        throw EventError(EventErrorKind::MissingSubject,
                         "crash_edge: no edge " + edge_str(e.u, e.v));
      }
      g.remove_edge(e.u, e.v);
      if (!is_connected(g)) {
        throw EventError(EventErrorKind::DisconnectingEvent,
                         "crash_edge " + edge_str(e.u, e.v) + " would disconnect the network");
      }
      break;
    }
    case EventKind::CrashNode: {
      if (!g.present(e.u)) {
        throw EventError(EventErrorKind::MissingSubject,
                         "crash_node: no node " + std::to_string(e.u));
      }
      if (e.u == root_) {
        throw EventError(EventErrorKind::RootCrash, "crash_node targets the root");
      }
      auto incident = g.nodes_[e.u].adj;  // copy: remove_edge edits it
      for (const auto& a : incident) g.remove_edge(e.u, a.peer);
      g.nodes_[e.u].present = false;
      --g.present_count_;
      if (!is_connected(g)) {
        throw EventError(EventErrorKind::DisconnectingEvent,
                         "crash_node " + std::to_string(e.u) + " would disconnect the network");
      }
      break;
    }
    case EventKind::RecovEdge: {
      if (!g.present(e.u) || !g.present(e.v)) {
        throw EventError(EventErrorKind::MissingSubject,
                         "recov_edge: missing endpoint of " + edge_str(e.u, e.v));
      }
      if (e.u == e.v || g.has_edge(e.u, e.v)) {
        throw EventError(EventErrorKind::DuplicateEdge,
                         "recov_edge: edge " + edge_str(e.u, e.v) + " already present");
      }
      if (!(e.weight > 0)) throw std::invalid_argument("recov_edge: weight must be positive");
      g.add_edge(e.u, e.v, e.weight);
      break;
    }
    case EventKind::RecovNode: {
      if (g.present(e.u)) {
        throw EventError(EventErrorKind::DuplicateEdge,
                         "recov_node: node " + std::to_string(e.u) + " already present");
      }
      if (e.adjacency.empty()) {
        throw EventError(EventErrorKind::DisconnectingEvent,
                         "recov_node: node without edges would be disconnected");
      }
      if (e.u >= g.nodes_.size()) g.nodes_.resize(e.u + 1);
      for (const auto& [peer, w] : e.adjacency) {
        if (!g.present(peer)) {
          throw EventError(EventErrorKind::MissingSubject,
                           "recov_node: neighbor " + std::to_string(peer) + " not present");
        }
        if (peer == e.u) throw std::invalid_argument("recov_node: self-loop");
        if (!(w > 0)) throw std::invalid_argument("recov_node: weight must be positive");
      }
      for (std::size_t i = 0; i < e.adjacency.size(); ++i) {
        for (std::size_t j = i + 1; j < e.adjacency.size(); ++j) {
          if (e.adjacency[i].first == e.adjacency[j].first) {
            throw EventError(EventErrorKind::DuplicateEdge, "recov_node: duplicate neighbor");
          }
        }
      }
      g.nodes_[e.u].present = true;
      ++g.present_count_;
      for (const auto& [peer, w] : e.adjacency) g.add_edge(e.u, peer, w);
      break;
    }
  }
  return g;
}

std::uint64_t DynamicGraph::structure_digest() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t x) {
    h ^= x;
    h *= 1099511628211ull;
  };
  mix(root_);
  mix(nodes_.size());
  for (NodeId v = 0; v < nodes_.size(); ++v) {
    if (!nodes_[v].present) continue;
    mix(v);
    for (const auto& a : nodes_[v].adj) {
      mix(a.port);
      mix(a.peer);
      std::uint64_t wbits;
      static_assert(sizeof(wbits) == sizeof(a.weight));
      __builtin_memcpy(&wbits, &a.weight, sizeof(wbits));
      mix(wbits);
    }
  }
  return h;
}

bool is_connected(const DynamicGraph& g) {
  if (!g.present(g.root())) return false;
  std::vector<bool> seen(g.id_bound(), false);
  std::vector<NodeId> queue{g.root()};
  seen[g.root()] = true;
  std::size_t reached = 0;
  while (!queue.empty()) {
    NodeId v = queue.back();
    queue.pop_back();
    ++reached;
    for (const auto& a : g.neighbors(v)) {
      if (!seen[a.peer]) {
        seen[a.peer] = true;
        queue.push_back(a.peer);
      }
    }
  }
  return reached == g.node_count();
}

EdgeSet EdgeSet::from_pairs(std::vector<std::pair<NodeId, NodeId>> pairs) {
  for (auto& [u, v] : pairs) {
    if (u > v) std::swap(u, v);
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  EdgeSet s;
  s.pairs_ = std::move(pairs);
  return s;
}

bool EdgeSet::contains(NodeId u, NodeId v) const {
  if (u > v) std::swap(u, v);
  return std::binary_search(pairs_.begin(), pairs_.end(), std::pair(u, v));
}

}  // namespace stabtree
