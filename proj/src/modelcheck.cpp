#include <algorithm>
#include <array>
#include <sstream>
#include <unordered_map>
#include <vector>

#include "stabtree/protocol.hpp"
#include "stabtree/verify.hpp"

// Explicit-state checking of the protocol on one tiny graph under the
// central daemon. States are the cross product of per-node registers with
// level and new_level bounded by the cap; exploration may leave the cap
// (corrupted levels grow during propagation), such states live in overflow
// maps and are reported.
//
// Convergence is decided as: no non-legitimate terminal state, and no
// weakly fair cycle among non-legitimate states. A cycle is weakly fair iff
// every (node, rule) action enabled at all states of its strongly connected
// component also fires on an edge inside it; a component failing that cannot
// trap a weakly fair execution.

namespace stabtree {

Verdict ModelCheckResult::overall() const {
  if (!convergence.holds) return convergence;
  if (!loopfree_closure.holds) return loopfree_closure;
  if (!legitimacy_closure.holds) return legitimacy_closure;
  return Verdict::ok();
}

namespace {

constexpr Level kLevelLimit = 255;  // packing bound, far above tiny-scope growth
constexpr int kMaxNodes = 5;

struct Key {
  std::uint64_t lo = 0, hi = 0;
  friend bool operator==(const Key&, const Key&) = default;
};

struct KeyHash {
  std::size_t operator()(const Key& k) const {
    std::uint64_t x = k.lo * 0x9e3779b97f4a7c15ull ^ (k.hi + 0xbf58476d1ce4e5b9ull);
    x ^= x >> 31;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 29;
    return static_cast<std::size_t>(x);
  }
};

// Per-node registers in checker form. parent 0 encodes bottom, k > 0 the
// k-th adjacency slot (ascending port order).
struct PackedState {
  std::array<std::uint8_t, kMaxNodes> parent{};
  std::array<std::uint8_t, kMaxNodes> status{};
  std::array<std::uint8_t, kMaxNodes> level{};
  std::array<std::uint8_t, kMaxNodes> newlevel{};
};

class Space {
 public:
  Space(const DynamicGraph& g, Level cap) : cap_(cap) {
    ids_ = g.nodes();
    n_ = static_cast<int>(ids_.size());
    std::vector<int> idx_of(g.id_bound(), -1);
    for (int i = 0; i < n_; ++i) idx_of[ids_[i]] = i;
    root_ = idx_of[g.root()];
    const auto dist = bfs_oracle(g);
    dist_.resize(n_);
    for (int i = 0; i < n_; ++i) dist_[i] = dist[ids_[i]];
    adj_.resize(n_);
    rev_slot_.resize(n_);
    for (int i = 0; i < n_; ++i) {
      for (const auto& a : g.neighbors(ids_[i])) adj_[i].push_back({idx_of[a.peer], a.port});
    }
    for (int i = 0; i < n_; ++i) {
      rev_slot_[i].resize(adj_[i].size());
      for (std::size_t s = 0; s < adj_[i].size(); ++s) {
        const int peer = adj_[i][s].first;
        for (std::size_t t = 0; t < adj_[peer].size(); ++t) {
          if (adj_[peer][t].first == i) rev_slot_[i][s] = static_cast<std::uint8_t>(t);
        }
      }
    }
    strides_.resize(n_);
    __int128 total = 1;
    for (int i = 0; i < n_; ++i) {
      strides_[i] = static_cast<std::uint64_t>(total);
      total *= static_cast<__int128>(adj_[i].size() + 1) * 2 * (cap_ + 1) * (cap_ + 1);
      if (total > (__int128{1} << 62)) {
        total = __int128{1} << 62;
        overflowed_ = true;
      }
    }
    count_ = static_cast<std::uint64_t>(total);
  }

  int n() const { return n_; }
  int root() const { return root_; }
  bool count_overflowed() const { return overflowed_; }
  std::uint64_t capped_count() const { return count_; }
  std::size_t degree(int i) const { return adj_[i].size(); }
  int peer_of_slot(int i, std::uint8_t slot) const { return adj_[i][slot - 1].first; }
  Level dist(int i) const { return dist_[i]; }

  bool in_cap(const PackedState& s) const {
    for (int i = 0; i < n_; ++i) {
      if (s.level[i] > cap_ || s.newlevel[i] > cap_) return false;
    }
    return true;
  }

  std::uint64_t index_of(const PackedState& s) const {
    std::uint64_t idx = 0;
    for (int i = 0; i < n_; ++i) {
      const std::uint64_t code =
          s.parent[i] +
          (adj_[i].size() + 1) *
              (s.status[i] + 2ull * (s.level[i] + (cap_ + 1ull) * s.newlevel[i]));
      idx += code * strides_[i];
    }
    return idx;
  }

  PackedState state_at(std::uint64_t idx) const {
    PackedState s;
    for (int i = 0; i < n_; ++i) {
      const std::uint64_t codes = (adj_[i].size() + 1) * 2ull * (cap_ + 1) * (cap_ + 1);
      std::uint64_t code = (idx / strides_[i]) % codes;
      s.parent[i] = static_cast<std::uint8_t>(code % (adj_[i].size() + 1));
      code /= adj_[i].size() + 1;
      s.status[i] = static_cast<std::uint8_t>(code % 2);
      code /= 2;
      s.level[i] = static_cast<std::uint8_t>(code % (cap_ + 1));
      s.newlevel[i] = static_cast<std::uint8_t>(code / (cap_ + 1));
    }
    return s;
  }

  Key key_of(const PackedState& s) const {
    Key k;
    for (int i = 0; i < n_; ++i) {
      const std::uint64_t packed = s.parent[i] | (std::uint64_t{s.status[i]} << 3) |
                                   (std::uint64_t{s.level[i]} << 4) |
                                   (std::uint64_t{s.newlevel[i]} << 12);
      if (i < 3) {
        k.lo |= packed << (20 * i);
      } else {
        k.hi |= packed << (20 * (i - 3));
      }
    }
    return k;
  }

  PackedState state_of(const Key& k) const {
    PackedState s;
    for (int i = 0; i < n_; ++i) {
      const std::uint64_t packed =
          i < 3 ? (k.lo >> (20 * i)) & 0xfffff : (k.hi >> (20 * (i - 3))) & 0xfffff;
      s.parent[i] = packed & 0x7;
      s.status[i] = (packed >> 3) & 0x1;
      s.level[i] = (packed >> 4) & 0xff;
      s.newlevel[i] = (packed >> 12) & 0xff;
    }
    return s;
  }

  void build_view(const PackedState& s, int i, LocalView& view) const {
    view.is_root = i == root_;
    view.self.parent =
        s.parent[i] ? std::optional<Port>(adj_[i][s.parent[i] - 1].second) : std::nullopt;
    view.self.status = s.status[i] ? Status::P : Status::N;
    view.self.level = s.level[i];
    view.self.new_level = s.newlevel[i];
    view.neighbors.clear();
    for (std::size_t slot = 0; slot < adj_[i].size(); ++slot) {
      const int nb = adj_[i][slot].first;
      view.neighbors.push_back({adj_[i][slot].second, s.level[nb],
                                s.status[nb] ? Status::P : Status::N, s.newlevel[nb],
                                s.parent[nb] == rev_slot_[i][slot] + 1});
    }
  }

  // Applies `rule` at node i (must be enabled on this state).
  PackedState successor(const PackedState& s, int i, Rule rule, LocalView& scratch) const {
    build_view(s, i, scratch);
    const NodeState ns = apply_rule(rule, scratch);
    PackedState t = s;
    if (ns.parent) {
      for (std::size_t slot = 0; slot < adj_[i].size(); ++slot) {
        if (adj_[i][slot].second == *ns.parent) t.parent[i] = static_cast<std::uint8_t>(slot + 1);
      }
    } else {
      t.parent[i] = 0;
    }
    t.status[i] = ns.status == Status::P ? 1 : 0;
    if (ns.level > kLevelLimit || ns.new_level > kLevelLimit) {
      throw StateSpaceTooLarge("model_check: level grew past the packing limit");
    }
    t.level[i] = static_cast<std::uint8_t>(ns.level);
    t.newlevel[i] = static_cast<std::uint8_t>(ns.new_level);
    return t;
  }

  void enabled(const PackedState& s, LocalView& scratch,
               std::array<std::uint8_t, kMaxNodes>& bits) const {
    for (int i = 0; i < n_; ++i) {
      build_view(s, i, scratch);
      bits[i] = enabled_rules(scratch).bits();
    }
  }

  bool legit(const PackedState& s) const {
    for (int i = 0; i < n_; ++i) {
      if (i == root_) {
        if (s.parent[i] != 0 || s.status[i] != 0 || s.level[i] != 0 || s.newlevel[i] != 0) {
          return false;
        }
        continue;
      }
      if (s.status[i] != 0 || s.level[i] != dist_[i] || s.parent[i] == 0) return false;
      const int p = adj_[i][s.parent[i] - 1].first;
      if (s.level[i] != static_cast<Level>(s.level[p]) + 1) return false;
    }
    return true;
  }

  bool parent_graph_acyclic(const PackedState& s) const {
    std::array<std::uint8_t, kMaxNodes> mark{};  // 0 fresh, 1 on chain, 2 done
    for (int start = 0; start < n_; ++start) {
      if (mark[start]) continue;
      int v = start;
      while (true) {
        if (mark[v] == 1) return false;
        if (mark[v] == 2) break;
        mark[v] = 1;
        if (v == root_ || s.parent[v] == 0) break;
        v = adj_[v][s.parent[v] - 1].first;
      }
      int u = start;
      while (mark[u] == 1) {
        mark[u] = 2;
        if (u == root_ || s.parent[u] == 0) break;
        u = adj_[u][s.parent[u] - 1].first;
      }
    }
    return true;
  }

  std::string describe(const PackedState& s) const {
    std::ostringstream os;
    for (int i = 0; i < n_; ++i) {
      if (i) os << ' ';
      os << ids_[i] << ":(";
      if (s.parent[i]) {
        os << 'p' << adj_[i][s.parent[i] - 1].second;
      } else {
        os << '-';
      }
      os << (s.status[i] ? ",P," : ",N,") << int(s.level[i]) << ',' << int(s.newlevel[i]) << ')';
    }
    return os.str();
  }

 private:
  Level cap_;
  int n_ = 0;
  int root_ = 0;
  bool overflowed_ = false;
  std::uint64_t count_ = 0;
  std::vector<NodeId> ids_;
  std::vector<Level> dist_;
  std::vector<std::vector<std::pair<int, Port>>> adj_;  // (peer index, port), port order
  std::vector<std::vector<std::uint8_t>> rev_slot_;
  std::vector<std::uint64_t> strides_;
};

class ConvergenceCheck {
 public:
  ConvergenceCheck(const Space& sp, ModelCheckResult& out) : sp_(sp), out_(out) {}

  void run() {
    indeg_.assign(sp_.capped_count(), 0);
    // In-degree accumulation over the capped universe. Only non-legitimate
    // states are expanded; legitimate successors are absorbing and beyond-cap
    // successors are truncation points.
    std::uint64_t non_legit = 0;
    for (std::uint64_t idx = 0; idx < sp_.capped_count(); ++idx) {
      const PackedState s = sp_.state_at(idx);
      if (sp_.legit(s)) continue;
      ++non_legit;
      expand(s);
      if (!out_.convergence.holds) return;
    }
    out_.reached_states = sp_.capped_count();

    // Kahn peel: acyclicity of the capped non-legitimate subgraph means
    // every fair execution drains into a legitimate configuration or leaves
    // the checked scope.
    std::uint64_t peeled = 0;
    std::vector<std::uint64_t> work;
    for (std::uint64_t idx = 0; idx < sp_.capped_count(); ++idx) {
      if (indeg_[idx] != 0) continue;
      const PackedState s = sp_.state_at(idx);
      if (!sp_.legit(s)) work.push_back(idx);
    }
    LocalView scratch;
    std::array<std::uint8_t, kMaxNodes> bits{};
    while (!work.empty()) {
      const PackedState s = sp_.state_at(work.back());
      work.pop_back();
      ++peeled;
      sp_.enabled(s, scratch, bits);
      for (int i = 0; i < sp_.n(); ++i) {
        for (int r = 0; r < kRuleCount; ++r) {
          if (!(bits[i] & (1u << r))) continue;
          const PackedState t = sp_.successor(s, i, static_cast<Rule>(r), scratch);
          if (!sp_.in_cap(t) || sp_.legit(t)) continue;
          const std::uint64_t ti = sp_.index_of(t);
          if (--indeg_[ti] == 0) work.push_back(ti);
        }
      }
    }
    if (peeled != non_legit) analyze_residual();
  }

 private:
  void expand(const PackedState& s) {
    sp_.enabled(s, scratch_, bits_);
    bool any = false;
    for (int i = 0; i < sp_.n(); ++i) {
      for (int r = 0; r < kRuleCount; ++r) {
        if (!(bits_[i] & (1u << r))) continue;
        any = true;
        const PackedState t = sp_.successor(s, i, static_cast<Rule>(r), scratch_);
        if (sp_.legit(t)) continue;
        if (!sp_.in_cap(t)) {
          ++out_.escape_transitions;
          continue;
        }
        ++indeg_[sp_.index_of(t)];
      }
    }
    if (!any) {
      out_.convergence = Verdict::fail("terminal non-legitimate state: " + sp_.describe(s));
    }
  }

  // Cycles survived the peel: group the residual states into strongly
  // connected components and look for one sustaining a weakly fair cycle.
  void analyze_residual() {
    std::vector<std::uint64_t> residual;
    for (std::uint64_t idx = 0; idx < sp_.capped_count(); ++idx) {
      if (indeg_[idx] == 0) continue;
      if (!sp_.legit(sp_.state_at(idx))) residual.push_back(idx);
    }
    std::unordered_map<std::uint64_t, std::uint32_t> id;
    id.reserve(residual.size());
    for (std::uint32_t i = 0; i < residual.size(); ++i) id.emplace(residual[i], i);

    const std::uint32_t count = static_cast<std::uint32_t>(residual.size());
    std::vector<std::vector<std::uint32_t>> succ(count);
    std::vector<std::vector<std::uint16_t>> label(count);
    LocalView scratch;
    std::array<std::uint8_t, kMaxNodes> bits{};
    for (std::uint32_t v = 0; v < count; ++v) {
      const PackedState s = sp_.state_at(residual[v]);
      sp_.enabled(s, scratch, bits);
      for (int i = 0; i < sp_.n(); ++i) {
        for (int r = 0; r < kRuleCount; ++r) {
          if (!(bits[i] & (1u << r))) continue;
          const PackedState t = sp_.successor(s, i, static_cast<Rule>(r), scratch);
          if (!sp_.in_cap(t)) continue;
          auto it = id.find(sp_.index_of(t));
          if (it != id.end()) {
            succ[v].push_back(it->second);
            label[v].push_back(static_cast<std::uint16_t>(i * kRuleCount + r));
          }
        }
      }
    }

    // Iterative Tarjan over the residual-induced subgraph.
    const std::uint32_t kUnset = 0xffffffffu;
    std::vector<std::uint32_t> index(count, kUnset), low(count, 0);
    std::vector<bool> on_stack(count, false);
    std::vector<std::uint32_t> stack;
    std::uint32_t next_index = 0;
    struct Frame {
      std::uint32_t v;
      std::size_t next;
    };
    std::vector<Frame> frames;
    for (std::uint32_t root = 0; root < count; ++root) {
      if (index[root] != kUnset) continue;
      frames.push_back({root, 0});
      index[root] = low[root] = next_index++;
      stack.push_back(root);
      on_stack[root] = true;
      while (!frames.empty()) {
        Frame& f = frames.back();
        if (f.next < succ[f.v].size()) {
          const std::uint32_t w = succ[f.v][f.next++];
          if (index[w] == kUnset) {
            index[w] = low[w] = next_index++;
            stack.push_back(w);
            on_stack[w] = true;
            frames.push_back({w, 0});
          } else if (on_stack[w]) {
            low[f.v] = std::min(low[f.v], index[w]);
          }
        } else {
          const std::uint32_t v = f.v;
          frames.pop_back();
          if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
          if (low[v] == index[v]) {
            std::vector<std::uint32_t> scc;
            while (true) {
              const std::uint32_t w = stack.back();
              stack.pop_back();
              on_stack[w] = false;
              scc.push_back(w);
              if (w == v) break;
            }
            if (scc.size() > 1 && has_fair_cycle(scc, residual, succ, label)) {
              out_.convergence =
                  Verdict::fail("weakly fair cycle among non-legitimate states, e.g. " +
                                sp_.describe(sp_.state_at(residual[scc.front()])));
              return;
            }
          }
        }
      }
    }
  }

  bool has_fair_cycle(const std::vector<std::uint32_t>& scc,
                      const std::vector<std::uint64_t>& residual,
                      const std::vector<std::vector<std::uint32_t>>& succ,
                      const std::vector<std::vector<std::uint16_t>>& label) {
    std::vector<bool> member(succ.size(), false);
    for (auto v : scc) member[v] = true;
    std::array<bool, kMaxNodes * kRuleCount> always_enabled;
    std::array<bool, kMaxNodes * kRuleCount> fired_inside{};
    always_enabled.fill(true);
    LocalView scratch;
    std::array<std::uint8_t, kMaxNodes> bits{};
    for (auto v : scc) {
      for (std::size_t e = 0; e < succ[v].size(); ++e) {
        if (member[succ[v][e]]) fired_inside[label[v][e]] = true;
      }
      sp_.enabled(sp_.state_at(residual[v]), scratch, bits);
      for (int i = 0; i < sp_.n(); ++i) {
        for (int r = 0; r < kRuleCount; ++r) {
          if (!(bits[i] & (1u << r))) always_enabled[i * kRuleCount + r] = false;
        }
      }
    }
    for (int a = 0; a < sp_.n() * kRuleCount; ++a) {
      if (always_enabled[a] && !fired_inside[a]) return false;  // unfair-only component
    }
    return true;
  }

  const Space& sp_;
  ModelCheckResult& out_;
  LocalView scratch_;
  std::array<std::uint8_t, kMaxNodes> bits_{};
  std::vector<std::uint32_t> indeg_;
};

}  // namespace

std::uint64_t model_check_state_count(const DynamicGraph& g, Level level_cap) {
  Space sp(g, level_cap);
  if (sp.count_overflowed()) return ~std::uint64_t{0};
  return sp.capped_count();
}

ModelCheckResult model_check(const DynamicGraph& g, Level level_cap,
                             const ModelCheckOptions& opts) {
  if (g.node_count() > kMaxNodes) {
    throw StateSpaceTooLarge("model_check: more than 5 nodes");
  }
  if (level_cap > 2 * g.node_count()) {
    throw StateSpaceTooLarge("model_check: level cap above twice the node count");
  }
  Space sp(g, level_cap);
  if (sp.count_overflowed() || sp.capped_count() > opts.max_states) {
    std::ostringstream os;
    os << "model_check: capped space has ";
    if (sp.count_overflowed()) {
      os << "more than 2^62";
    } else {
      os << sp.capped_count();
    }
    os << " states, budget " << opts.max_states;
    throw StateSpaceTooLarge(os.str());
  }

  ModelCheckResult out;
  out.capped_states = sp.capped_count();

  LocalView scratch;
  std::array<std::uint8_t, kMaxNodes> bits{};

  // Loop-freedom closure. Only a fresh parent assignment can close a cycle,
  // and R_SafeChangeP is the one rule that performs it (R_InitRoot clears
  // the pointer, which only removes an edge from the parent graph).
  for (std::uint64_t idx = 0; idx < sp.capped_count() && out.loopfree_closure.holds; ++idx) {
    const PackedState s = sp.state_at(idx);
    if (!sp.parent_graph_acyclic(s)) continue;
    for (int i = 0; i < sp.n(); ++i) {
      if (i == sp.root()) continue;
      sp.build_view(s, i, scratch);
      if (!enabled_rules(scratch).contains(Rule::SafeChangeP)) continue;
      const PackedState t = sp.successor(s, i, Rule::SafeChangeP, scratch);
      if (!sp.parent_graph_acyclic(t)) {
        out.loopfree_closure = Verdict::fail("R_SafeChangeP at node " + std::to_string(i) +
                                             " creates a cycle from " + sp.describe(s));
        break;
      }
    }
  }

  // Legitimacy closure: enumerate the legitimate capped states directly
  // (levels pinned to distances, parents one layer up, new_level free) and
  // require every successor to stay legitimate.
  {
    bool enumerable = true;
    std::vector<std::vector<std::uint8_t>> parent_slots(sp.n());
    for (int i = 0; i < sp.n() && enumerable; ++i) {
      if (i == sp.root()) continue;
      if (sp.dist(i) > level_cap) {
        enumerable = false;  // no legitimate state fits the cap
        break;
      }
      for (std::uint8_t slot = 1; slot <= sp.degree(i); ++slot) {
        if (sp.dist(sp.peer_of_slot(i, slot)) + 1 == sp.dist(i)) parent_slots[i].push_back(slot);
      }
    }
    if (enumerable) {
      PackedState base{};
      for (int i = 0; i < sp.n(); ++i) base.level[i] = static_cast<std::uint8_t>(sp.dist(i));
      std::vector<std::size_t> pick(sp.n(), 0);
      std::vector<Level> nl(sp.n(), 0);
      bool done = false;
      while (!done && out.legitimacy_closure.holds) {
        PackedState s = base;
        for (int i = 0; i < sp.n(); ++i) {
          if (i == sp.root()) continue;
          s.parent[i] = parent_slots[i][pick[i]];
          s.newlevel[i] = static_cast<std::uint8_t>(nl[i]);
        }
        ++out.legitimate_states;
        sp.enabled(s, scratch, bits);
        for (int i = 0; i < sp.n() && out.legitimacy_closure.holds; ++i) {
          for (int r = 0; r < kRuleCount; ++r) {
            if (!(bits[i] & (1u << r))) continue;
            const PackedState t = sp.successor(s, i, static_cast<Rule>(r), scratch);
            if (!sp.legit(t)) {
              out.legitimacy_closure =
                  Verdict::fail(std::string(rule_name(static_cast<Rule>(r))) +
                                " leaves legitimacy from " + sp.describe(s));
              break;
            }
          }
        }
        // Advance the mixed radix counter: new_levels first, then parents.
        done = true;
        for (int i = 0; i < sp.n() && done; ++i) {
          if (i == sp.root()) continue;
          if (nl[i] < level_cap) {
            ++nl[i];
            done = false;
          } else {
            nl[i] = 0;
          }
        }
        if (done) {
          for (int i = 0; i < sp.n() && done; ++i) {
            if (i == sp.root()) continue;
            if (pick[i] + 1 < parent_slots[i].size()) {
              ++pick[i];
              done = false;
            } else {
              pick[i] = 0;
            }
          }
        }
      }
    }
  }

  ConvergenceCheck(sp, out).run();
  return out;
}

std::vector<DynamicGraph> all_connected_rooted_graphs(std::uint32_t n) {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) pairs.emplace_back(u, v);
  }
  std::vector<DynamicGraph> out;
  const std::uint32_t m = static_cast<std::uint32_t>(pairs.size());
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    // Canonical form: smallest mask over root-preserving relabelings.
    std::vector<NodeId> p;
    for (NodeId i = 1; i < n; ++i) p.push_back(i);
    std::uint32_t best = mask;
    do {
      std::uint32_t remapped = 0;
      for (std::uint32_t b = 0; b < m; ++b) {
        if (!(mask & (1u << b))) continue;
        NodeId u = pairs[b].first == 0 ? 0 : p[pairs[b].first - 1];
        NodeId v = pairs[b].second == 0 ? 0 : p[pairs[b].second - 1];
        if (u > v) std::swap(u, v);
        for (std::uint32_t c = 0; c < m; ++c) {
          if (pairs[c] == std::pair(u, v)) {
            remapped |= 1u << c;
            break;
          }
        }
      }
      best = std::min(best, remapped);
    } while (std::next_permutation(p.begin(), p.end()));
    if (best != mask) continue;

    std::vector<EdgeSpec> edges;
    for (std::uint32_t b = 0; b < m; ++b) {
      if (mask & (1u << b)) edges.push_back({pairs[b].first, pairs[b].second, 1.0});
    }
    DynamicGraph g(0, n, edges);
    if (is_connected(g)) out.push_back(std::move(g));
  }
  return out;
}

}  // namespace stabtree
