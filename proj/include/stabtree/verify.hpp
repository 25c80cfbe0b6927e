#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "stabtree/configuration.hpp"
#include "stabtree/graph.hpp"
#include "stabtree/trace.hpp"
#include "stabtree/types.hpp"

namespace stabtree {

struct Verdict {
  bool holds = true;
  std::string witness;  // nonempty exactly when !holds

  static Verdict ok() { return {}; }
  static Verdict fail(std::string w) { return {false, std::move(w)}; }
  explicit operator bool() const { return holds; }
};

// Machine-readable summary line: VERDICT <name> <true|false> [witness=...]
void print_verdict(std::ostream& os, std::string_view name, const Verdict& v);

class PreconditionViolated : public std::runtime_error {
 public:
  explicit PreconditionViolated(const std::string& what) : std::runtime_error(what) {}
};

class StateSpaceTooLarge : public std::runtime_error {
 public:
  explicit StateSpaceTooLarge(const std::string& what) : std::runtime_error(what) {}
};

class OracleTooLarge : public std::runtime_error {
 public:
  explicit OracleTooLarge(const std::string& what) : std::runtime_error(what) {}
};

// ---- configuration predicates ----

// No directed cycle among the parent pointers that resolve to a neighbor.
Verdict loop_free(const Configuration& c);

// Correct BFS tree: root registers exactly (bottom, N, 0, 0); every other
// node has status N, its exact hop distance as level, and a parent one level
// closer. `strict` additionally demands new_level == level off the root.
Verdict legitimate(const Configuration& c, bool strict = false);

// Local coherence for all non-orphan nodes: parent level + 1 <= level and
// new_level >= level; the root must sit at level 0 with status N.
Verdict coherent(const Configuration& c);

// Exact hop distances from the root; requires a connected graph. Indexed by
// node id; entries of absent ids are unspecified.
std::vector<Level> bfs_oracle(const DynamicGraph& g);

// Terminal legitimate configuration built from the BFS oracle (smallest
// optimal port as parent, new_level == level).
Configuration legitimate_configuration(std::shared_ptr<const DynamicGraph> g);

// Nodes hanging from the element removed by `e`, computed on a legitimate
// pre-event configuration. Empty when the crashed edge is not a tree edge.
std::vector<NodeId> detached_subtree(const Configuration& pre_event, const TopologyEvent& e);

// Super-stabilization passage check on a recorded trace: it must start
// legitimate and contain exactly one event, a crash. Holds iff every node
// whose parent register changes after the event was detached by it.
Verdict passage_holds(const ExecutionTrace& t, const TopologyEvent& e);

// ---- metric oracles ----

// Absorbing maximum for bottleneck flows at the root.
inline constexpr Weight kTopFlow = std::numeric_limits<Weight>::infinity();

// Maximum bottleneck value per node over all root paths; the root gets the
// infinity sentinel. Requires a connected graph with positive weights.
std::vector<Weight> widest_path_oracle(const DynamicGraph& g);

// Widest-path tree realizing the oracle values (smallest achieving port).
EdgeSet widest_path_tree(const DynamicGraph& g);

struct MinDegreeTree {
  EdgeSet edges;
  std::uint32_t degree = 0;
};

// Spanning tree minimizing the maximum node degree, by complete search.
// Throws OracleTooLarge beyond 10 nodes.
MinDegreeTree min_degree_tree_oracle(const DynamicGraph& g);

Verdict check_M_maxflow(const DynamicGraph& g, const EdgeSet& s);
Verdict check_M_mindeg(const DynamicGraph& g, const EdgeSet& s);

// ---- small-scope model checking ----

struct ModelCheckOptions {
  // Hard budget on the enumerated capped state count.
  std::uint64_t max_states = 1ull << 26;
};

struct ModelCheckResult {
  Verdict convergence;
  Verdict loopfree_closure;
  Verdict legitimacy_closure;
  std::uint64_t capped_states = 0;       // enumerated initial states
  std::uint64_t reached_states = 0;      // states covered by the search
  std::uint64_t escape_transitions = 0;  // moves into beyond-cap configurations (not followed)
  std::uint64_t legitimate_states = 0;

  Verdict overall() const;
};

// Exhaustive check over every configuration with level and new_level at most
// `level_cap`, under all central-daemon choices:
//   (a) every weakly fair execution reaches a legitimate configuration or
//       leaves the capped scope (such moves are counted, not followed:
//       beyond the cap the space is unbounded),
//   (b) successors of loop-free configurations stay loop-free,
//   (c) legitimate configurations are terminal or stay legitimate.
// Throws StateSpaceTooLarge when more than 5 nodes, level_cap > 2|V|, or the
// capped space exceeds opts.max_states.
ModelCheckResult model_check(const DynamicGraph& g, Level level_cap,
                             const ModelCheckOptions& opts = {});

// Exact size of the capped enumeration space (no side effects).
std::uint64_t model_check_state_count(const DynamicGraph& g, Level level_cap);

// All connected graphs on n nodes with node 0 as root, deduplicated up to
// root-preserving isomorphism. Unit weights.
std::vector<DynamicGraph> all_connected_rooted_graphs(std::uint32_t n);

}  // namespace stabtree
