#include "stabtree/protocol.hpp"

#include <algorithm>
#include <string>

namespace stabtree {

const char* rule_name(Rule r) {
  switch (r) {
    case Rule::InitRoot: return "R_InitRoot";
    case Rule::LevelCorrect: return "R_LevelCorrect";
    case Rule::SafeChangeP: return "R_SafeChangeP";
    case Rule::LevelIncrement: return "R_Level++";
    case Rule::EndPropag: return "R_EndPropag";
    case Rule::Dynamic: return "R_Dynamic";
  }
  return "?";
}

RuleNotEnabled::RuleNotEnabled(Rule r)
    : std::logic_error(std::string("rule not enabled: ") + rule_name(r)) {}

namespace {

// Parent pointer resolves to a current neighbor.
const NeighborView* parent_entry(const LocalView& view) {
  if (!view.self.parent) return nullptr;
  return view.find(*view.self.parent);
}

}  // namespace

Level level_hat(const LocalView& view) {
  if (view.is_root) return 0;
  if (view.neighbors.empty()) throw NonRootIsolated();
  Level best = view.neighbors.front().level;
  for (const auto& nb : view.neighbors) best = std::min(best, nb.level);
  return best + 1;
}

std::optional<Port> parent_hat(const LocalView& view) {
  if (view.is_root || view.neighbors.empty()) return std::nullopt;
  const Level want = level_hat(view) - 1;
  for (const auto& nb : view.neighbors) {  // ascending port: first hit is Min
    if (nb.level == want && nb.status == Status::N) return nb.port;
  }
  return std::nullopt;
}

std::vector<Port> children(const LocalView& view) {
  std::vector<Port> out;
  for (const auto& nb : view.neighbors) {
    if (nb.points_here && nb.level > view.self.level) out.push_back(nb.port);
  }
  return out;
}

std::optional<Level> ubl(const LocalView& view) {
  std::optional<Level> best;
  for (const auto& nb : view.neighbors) {
    if (nb.points_here && nb.level > view.self.level) {
      Level candidate = nb.level - 1;
      if (!best || candidate < *best) best = candidate;
    }
  }
  return best;
}

bool p_change(const LocalView& view) {
  auto ph = parent_hat(view);
  if (!ph) return false;
  const Level lh = level_hat(view);
  return lh < view.self.level || (view.self.level == lh && view.self.parent != ph);
}

bool level_up(const LocalView& view) {
  const NeighborView* p = parent_entry(view);
  if (!p) throw std::logic_error("level_up: parent not a current neighbor");
  return view.self.level != p->level + 1 ||
         (p->status == Status::P && view.self.level != p->new_level + 1);
}

bool propag_end(const LocalView& view) {
  for (const auto& nb : view.neighbors) {
    if (nb.points_here && nb.level > view.self.level && nb.status != Status::N) return false;
  }
  return true;
}

RuleSet enabled_rules(const LocalView& view) {
  RuleSet set;
  const NodeState& s = view.self;
  if (view.is_root) {
    if (s.parent || s.level != 0 || s.new_level != 0 || s.status != Status::N) {
      set.insert(Rule::InitRoot);
    }
    return set;
  }
  if (s.new_level < s.level) set.insert(Rule::LevelCorrect);
  const bool parent_present = parent_entry(view) != nullptr;
  if (s.status == Status::N) {
    const bool pc = p_change(view);
    if (pc) set.insert(Rule::SafeChangeP);
    if (parent_present && !pc && level_up(view)) set.insert(Rule::LevelIncrement);
    // The action needs a defined best level, hence the nonempty neighborhood.
    if (!parent_present && !pc && !view.neighbors.empty()) set.insert(Rule::Dynamic);
  } else {
    if (propag_end(view)) {
      auto u = ubl(view);
      if (!u || *u >= s.new_level) set.insert(Rule::EndPropag);
    }
  }
  return set;
}

NodeState apply_rule(Rule r, const LocalView& view) {
  if (!enabled_rules(view).contains(r)) throw RuleNotEnabled(r);
  NodeState s = view.self;
  switch (r) {
    case Rule::InitRoot:
      s.parent.reset();
      s.level = 0;
      s.new_level = 0;
      s.status = Status::N;
      break;
    case Rule::SafeChangeP:
      s.level = level_hat(view);
      s.new_level = s.level;
      s.parent = parent_hat(view);
      break;
    case Rule::LevelIncrement: {
      s.status = Status::P;
      const NeighborView* p = view.find(*s.parent);
      s.new_level = p->new_level + 1;
      break;
    }
    case Rule::EndPropag:
      s.status = Status::N;
      s.level = s.new_level;
      break;
    case Rule::LevelCorrect:
      s.new_level = s.level;
      break;
    case Rule::Dynamic:
      s.status = Status::P;
      s.new_level = level_hat(view);
      break;
  }
  return s;
}

}  // namespace stabtree
