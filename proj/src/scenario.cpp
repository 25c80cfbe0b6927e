#include "stabtree/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "stabtree/engine.hpp"
#include "stabtree/verify.hpp"

namespace stabtree {

ParseError::ParseError(int line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

std::string Scenario::node_label(NodeId v) const {
  if (v < node_names.size() && !node_names[v].empty()) return node_names[v];
  return "#" + std::to_string(v);
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) {
    if (tok[0] == '#') break;  // trailing comment
    out.push_back(tok);
  }
  return out;
}

std::uint64_t parse_u64(const std::string& s, int line, const char* what) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw ParseError(line, std::string("expected ") + what + ", got '" + s + "'");
  }
  return v;
}

Weight parse_weight(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    Weight w = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    if (!(w > 0)) throw ParseError(line, "weight must be positive");
    return w;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception&) {
    throw ParseError(line, "expected weight, got '" + s + "'");
  }
}

std::string format_weight(Weight w) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", w);
  return buf;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Scenario parse() {
    std::istringstream is{std::string(text_)};
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      auto tok = tokenize(line);
      if (tok.empty()) continue;
      handle(tok, lineno);
    }
    finish();
    return std::move(s_);
  }

 private:
  NodeId lookup(const std::string& name, int line) {
    for (NodeId v = 0; v < s_.node_names.size(); ++v) {
      if (s_.node_names[v] == name) return v;
    }
    throw ParseError(line, "unknown node '" + name + "'");
  }

  NodeId intern(const std::string& name) {
    for (NodeId v = 0; v < s_.node_names.size(); ++v) {
      if (s_.node_names[v] == name) return v;
    }
    s_.node_names.push_back(name);
    return static_cast<NodeId>(s_.node_names.size() - 1);
  }

  void handle(const std::vector<std::string>& tok, int line) {
    const std::string& kw = tok[0];
    if (kw == "node") {
      if (tok.size() < 2 || tok.size() > 3 || (tok.size() == 3 && tok[2] != "root")) {
        throw ParseError(line, "usage: node <name> [root]");
      }
      if (!s_.events.empty()) throw ParseError(line, "node lines must precede events");
      for (const auto& n : s_.node_names) {
        if (n == tok[1]) throw ParseError(line, "duplicate node '" + tok[1] + "'");
      }
      s_.node_names.push_back(tok[1]);
      s_.declared_nodes = static_cast<std::uint32_t>(s_.node_names.size());
      if (tok.size() == 3) {
        if (has_root_) throw ParseError(line, "second root declaration");
        has_root_ = true;
        s_.root = static_cast<NodeId>(s_.node_names.size() - 1);
      }
    } else if (kw == "edge") {
      if (tok.size() != 4) throw ParseError(line, "usage: edge <u> <v> <weight>");
      NodeId u = lookup(tok[1], line);
      NodeId v = lookup(tok[2], line);
      if (u == v) throw ParseError(line, "self-loop edge");
      for (const auto& e : s_.edges) {
        if ((e.u == u && e.v == v) || (e.u == v && e.v == u)) {
          throw ParseError(line, "duplicate edge");
        }
      }
      s_.edges.push_back({u, v, parse_weight(tok[3], line)});
    } else if (kw == "init") {
      handle_init(tok, line);
    } else if (kw == "daemon") {
      if (tok.size() == 2 && tok[1] == "central") {
        s_.daemon = {DaemonKind::Central, 0, 0};
      } else if (tok.size() == 2 && tok[1] == "synchronous") {
        s_.daemon = {DaemonKind::Synchronous, 0, 0};
      } else if (tok.size() == 4 && tok[1] == "adversarial") {
        s_.daemon = {DaemonKind::Adversarial, parse_u64(tok[2], line, "seed"),
                     static_cast<std::uint32_t>(parse_u64(tok[3], line, "fairness bound"))};
        if (s_.daemon.fairness_bound == 0) throw ParseError(line, "fairness bound must be positive");
      } else {
        throw ParseError(line, "usage: daemon central|synchronous|adversarial <seed> <bound>");
      }
    } else if (kw == "budget") {
      if (tok.size() != 2) throw ParseError(line, "usage: budget <max_steps>");
      s_.budget = parse_u64(tok[1], line, "step budget");
    } else if (kw == "event") {
      handle_event(tok, line);
    } else {
      throw ParseError(line, "unknown directive '" + kw + "'");
    }
  }

  void handle_init(const std::vector<std::string>& tok, int line) {
    if (tok.size() == 2 && tok[1] == "legitimate") {
      set_mode(InitMode::Legitimate, line);
      return;
    }
    if (tok.size() == 3 && tok[1] == "random") {
      set_mode(InitMode::Random, line);
      s_.init.seed = parse_u64(tok[2], line, "seed");
      return;
    }
    if (tok.size() != 6) {
      throw ParseError(line,
                       "usage: init <node> parent=<port|none> status=<N|P> level=<n> newlevel=<n>"
                       " | init legitimate | init random <seed>");
    }
    set_mode(InitMode::Explicit, line);
    NodeId v = lookup(tok[1], line);
    NodeState st;
    for (std::size_t i = 2; i < tok.size(); ++i) {
      auto eq = tok[i].find('=');
      if (eq == std::string::npos) throw ParseError(line, "expected key=value, got '" + tok[i] + "'");
      const std::string key = tok[i].substr(0, eq);
      const std::string val = tok[i].substr(eq + 1);
      if (key == "parent") {
        if (val == "none") {
          st.parent.reset();
        } else {
          st.parent = static_cast<Port>(parse_u64(val, line, "port"));
        }
      } else if (key == "status") {
        if (val == "N") {
          st.status = Status::N;
        } else if (val == "P") {
          st.status = Status::P;
        } else {
          throw ParseError(line, "status must be N or P");
        }
      } else if (key == "level") {
        st.level = static_cast<Level>(parse_u64(val, line, "level"));
      } else if (key == "newlevel") {
        st.new_level = static_cast<Level>(parse_u64(val, line, "newlevel"));
      } else {
        throw ParseError(line, "unknown init key '" + key + "'");
      }
    }
    for (const auto& [u, ignored] : s_.init.states) {
      if (u == v) throw ParseError(line, "duplicate init for node '" + tok[1] + "'");
    }
    s_.init.states.emplace_back(v, st);
  }

  void set_mode(InitMode m, int line) {
    if (mode_set_ && s_.init.mode != m) {
      throw ParseError(line, "conflicting init directives");
    }
    if (mode_set_ && m != InitMode::Explicit) {
      throw ParseError(line, "repeated init directive");
    }
    s_.init.mode = m;
    mode_set_ = true;
  }

  void handle_event(const std::vector<std::string>& tok, int line) {
    if (tok.size() < 3) throw ParseError(line, "usage: event <step> <kind> ...");
    TopologyEvent e;
    e.at_step = parse_u64(tok[1], line, "step");
    const std::string& kind = tok[2];
    if (kind == "crash_edge") {
      if (tok.size() != 5) throw ParseError(line, "usage: event <step> crash_edge <u> <v>");
      e.kind = EventKind::CrashEdge;
      e.u = lookup(tok[3], line);
      e.v = lookup(tok[4], line);
    } else if (kind == "recov_edge") {
      if (tok.size() != 6) throw ParseError(line, "usage: event <step> recov_edge <u> <v> <w>");
      e.kind = EventKind::RecovEdge;
      e.u = lookup(tok[3], line);
      e.v = lookup(tok[4], line);
      e.weight = parse_weight(tok[5], line);
    } else if (kind == "crash_node") {
      if (tok.size() != 4) throw ParseError(line, "usage: event <step> crash_node <u>");
      e.kind = EventKind::CrashNode;
      e.u = lookup(tok[3], line);
    } else if (kind == "recov_node") {
      if (tok.size() < 5) {
        throw ParseError(line, "usage: event <step> recov_node <u> <neighbor:w>...");
      }
      e.kind = EventKind::RecovNode;
      e.u = intern(tok[3]);
      for (std::size_t i = 4; i < tok.size(); ++i) {
        auto colon = tok[i].rfind(':');
        if (colon == std::string::npos) {
          throw ParseError(line, "expected <neighbor:w>, got '" + tok[i] + "'");
        }
        NodeId nb = lookup(tok[i].substr(0, colon), line);
        e.adjacency.emplace_back(nb, parse_weight(tok[i].substr(colon + 1), line));
      }
    } else {
      throw ParseError(line, "unknown event kind '" + kind + "'");
    }
    if (!s_.events.empty() && s_.events.back().at_step > e.at_step) {
      throw ParseError(line, "events must be listed in step order");
    }
    s_.events.push_back(std::move(e));
  }

  void finish() {
    if (s_.node_names.empty()) throw ParseError(1, "scenario declares no nodes");
    if (!has_root_) throw ParseError(1, "scenario declares no root");
  }

  std::string_view text_;
  Scenario s_;
  bool has_root_ = false;
  bool mode_set_ = false;
};

}  // namespace

Scenario parse_scenario(std::string_view text) { return Parser(text).parse(); }

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize(const Scenario& s) {
  std::ostringstream os;
  for (NodeId v = 0; v < s.declared_nodes; ++v) {
    os << "node " << s.node_names[v];
    if (v == s.root) os << " root";
    os << '\n';
  }
  for (const auto& e : s.edges) {
    os << "edge " << s.node_names[e.u] << ' ' << s.node_names[e.v] << ' ' << format_weight(e.w)
       << '\n';
  }
  switch (s.init.mode) {
    case InitMode::Legitimate:
      os << "init legitimate\n";
      break;
    case InitMode::Random:
      os << "init random " << s.init.seed << '\n';
      break;
    case InitMode::Explicit:
      for (const auto& [v, st] : s.init.states) {
        os << "init " << s.node_names[v] << " parent=";
        if (st.parent) {
          os << *st.parent;
        } else {
          os << "none";
        }
        os << " status=" << status_char(st.status) << " level=" << st.level
           << " newlevel=" << st.new_level << '\n';
      }
      break;
  }
  os << "daemon ";
  switch (s.daemon.kind) {
    case DaemonKind::Central:
      os << "central";
      break;
    case DaemonKind::Synchronous:
      os << "synchronous";
      break;
    case DaemonKind::Adversarial:
      os << "adversarial " << s.daemon.seed << ' ' << s.daemon.fairness_bound;
      break;
  }
  os << '\n';
  os << "budget " << s.budget << '\n';
  for (const auto& e : s.events) {
    os << "event " << e.at_step << ' ' << event_kind_name(e.kind);
    switch (e.kind) {
      case EventKind::CrashEdge:
        os << ' ' << s.node_names[e.u] << ' ' << s.node_names[e.v];
        break;
      case EventKind::RecovEdge:
        os << ' ' << s.node_names[e.u] << ' ' << s.node_names[e.v] << ' '
           << format_weight(e.weight);
        break;
      case EventKind::CrashNode:
        os << ' ' << s.node_names[e.u];
        break;
      case EventKind::RecovNode:
        os << ' ' << s.node_names[e.u];
        for (const auto& [nb, w] : e.adjacency) {
          os << ' ' << s.node_names[nb] << ':' << format_weight(w);
        }
        break;
    }
    os << '\n';
  }
  return os.str();
}

std::shared_ptr<const DynamicGraph> build_graph(const Scenario& s) {
  auto g = std::make_shared<DynamicGraph>(s.root, s.declared_nodes, s.edges);
  if (!is_connected(*g)) {
    throw std::runtime_error("scenario graph is not connected");
  }
  return g;
}

Configuration initial_configuration(const Scenario& s, std::shared_ptr<const DynamicGraph> g) {
  switch (s.init.mode) {
    case InitMode::Legitimate:
      return legitimate_configuration(std::move(g));
    case InitMode::Random:
      return random_configuration(std::move(g), s.init.seed);
    case InitMode::Explicit: {
      Configuration c;
      c.states.resize(g->id_bound());
      for (const auto& [v, st] : s.init.states) c.states[v] = st;
      c.graph = std::move(g);
      return c;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace stabtree
