#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>

namespace stabtree {

using NodeId = std::uint32_t;
using Port = std::uint32_t;  // local edge labels, 1-based, unique per node
using Level = std::uint32_t;
using Weight = double;

enum class Status : std::uint8_t { N, P };

inline char status_char(Status s) { return s == Status::N ? 'N' : 'P'; }

// Declaration order doubles as the default rule-selection priority.
enum class Rule : std::uint8_t {
  InitRoot = 0,
  LevelCorrect,
  SafeChangeP,
  LevelIncrement,
  EndPropag,
  Dynamic,
};

inline constexpr int kRuleCount = 6;

const char* rule_name(Rule r);

class RuleSet {
 public:
  constexpr RuleSet() = default;

  constexpr void insert(Rule r) { bits_ |= mask(r); }
  constexpr void erase(Rule r) { bits_ &= ~mask(r); }
  constexpr bool contains(Rule r) const { return (bits_ & mask(r)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr int size() const { return __builtin_popcount(bits_); }
  constexpr std::uint8_t bits() const { return bits_; }

  // Lowest-priority-index rule in the set; set must be nonempty.
  Rule first() const {
    if (empty()) throw std::logic_error("RuleSet::first on empty set");
    return static_cast<Rule>(__builtin_ctz(bits_));
  }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (int i = 0; i < kRuleCount; ++i) {
      if (bits_ & (1u << i)) fn(static_cast<Rule>(i));
    }
  }

  friend constexpr bool operator==(RuleSet a, RuleSet b) { return a.bits_ == b.bits_; }

 private:
  static constexpr std::uint8_t mask(Rule r) {
    return static_cast<std::uint8_t>(1u << static_cast<int>(r));
  }
  std::uint8_t bits_ = 0;
};

// Per-node protocol registers. Arbitrary values are meaningful: the system
// may start fully corrupted.
struct NodeState {
  std::optional<Port> parent;  // nullopt encodes the bottom pointer
  Status status = Status::N;
  Level level = 0;
  Level new_level = 0;

  friend bool operator==(const NodeState&, const NodeState&) = default;
};

}  // namespace stabtree
