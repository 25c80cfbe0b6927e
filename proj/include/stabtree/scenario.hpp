#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "stabtree/configuration.hpp"
#include "stabtree/daemon.hpp"
#include "stabtree/graph.hpp"
#include "stabtree/types.hpp"

namespace stabtree {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

enum class InitMode : std::uint8_t { Legitimate, Random, Explicit };

struct ScenarioInit {
  InitMode mode = InitMode::Legitimate;
  std::uint64_t seed = 0;  // Random
  // Explicit per-node states; nodes not listed start from default registers.
  std::vector<std::pair<NodeId, NodeState>> states;

  friend bool operator==(const ScenarioInit&, const ScenarioInit&) = default;
};

// Parsed scenario file. Node names exist only here; the engine works on
// anonymous ids (the declaration index).
struct Scenario {
  std::vector<std::string> node_names;  // index == NodeId; includes recov targets
  std::uint32_t declared_nodes = 0;     // nodes present at step 0
  NodeId root = 0;
  std::vector<EdgeSpec> edges;
  ScenarioInit init;
  Daemon daemon;
  std::uint64_t budget = 10000;
  std::vector<TopologyEvent> events;  // ascending at_step

  friend bool operator==(const Scenario&, const Scenario&) = default;

  std::string node_label(NodeId v) const;
};

Scenario parse_scenario(std::string_view text);
Scenario load_scenario_file(const std::string& path);

// Canonical text form; parsing it yields an equal Scenario.
std::string serialize(const Scenario& s);

std::shared_ptr<const DynamicGraph> build_graph(const Scenario& s);
Configuration initial_configuration(const Scenario& s, std::shared_ptr<const DynamicGraph> g);

}  // namespace stabtree
