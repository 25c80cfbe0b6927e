#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "stabtree/types.hpp"
#include "stabtree/view.hpp"

// The node program: four registers, the guard predicates, and six rules.
// Everything here is a pure function of a LocalView.

namespace stabtree {

// A non-root node with an empty neighborhood has no defined best level.
// Cannot happen while the network is connected; surfaced for safety.
class NonRootIsolated : public std::logic_error {
 public:
  NonRootIsolated() : std::logic_error("non-root node has no neighbors") {}
};

class RuleNotEnabled : public std::logic_error {
 public:
  explicit RuleNotEnabled(Rule r);
};

// 0 at the root, otherwise min over neighbors of (level + 1).
Level level_hat(const LocalView& view);

// Smallest port whose neighbor sits at level_hat-1 with status N; nullopt
// when no neighbor qualifies.
std::optional<Port> parent_hat(const LocalView& view);

// Ports of neighbors that name this node as parent and have a strictly
// larger level.
std::vector<Port> children(const LocalView& view);

// min over children of (level - 1); nullopt encodes infinity (no children).
std::optional<Level> ubl(const LocalView& view);

bool p_change(const LocalView& view);
// Requires the parent pointer to resolve to a neighbor in the view.
bool level_up(const LocalView& view);
bool propag_end(const LocalView& view);

RuleSet enabled_rules(const LocalView& view);

// Executes the rule's assignments in listed order and returns the new state.
// Throws RuleNotEnabled if the guard does not hold on this view.
NodeState apply_rule(Rule r, const LocalView& view);

// Default deterministic pick when several rules are enabled at one node.
inline Rule default_rule_choice(RuleSet s) { return s.first(); }

}  // namespace stabtree
