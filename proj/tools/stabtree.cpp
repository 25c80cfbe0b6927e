// Command-line front end: parse scenario files, run or check them, model
// check tiny instances exhaustively, drive composed runs, and sweep
// convergence statistics. Exit code 0 means every printed verdict holds.

#include <algorithm>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stabtree/compose.hpp"
#include "stabtree/engine.hpp"
#include "stabtree/graphgen.hpp"
#include "stabtree/protocol.hpp"
#include "stabtree/scenario.hpp"
#include "stabtree/verify.hpp"

namespace st = stabtree;

namespace {

st::NodeNamer namer_for(const st::Scenario& s) {
  return [s](st::NodeId v) { return s.node_label(v); };
}

// Shared by run and check: execute the scenario and report verdicts.
int run_scenario(const std::string& path, bool print_trace_flag, bool full_trace, bool strict) {
  const st::Scenario sc = st::load_scenario_file(path);
  auto graph = st::build_graph(sc);
  st::Configuration c0 = st::initial_configuration(sc, graph);

  st::RunOptions opts;
  opts.max_steps = sc.budget;
  opts.record = true;
  opts.stop = [strict](const st::Configuration& c) { return st::legitimate(c, strict).holds; };
  st::ExecutionTrace trace = st::run(c0, sc.daemon, sc.events, opts);

  if (print_trace_flag) st::print_trace(std::cout, trace, full_trace, namer_for(sc));

  bool all_hold = true;
  st::Verdict lf = st::Verdict::ok();
  const st::Configuration* prev = &trace.initial;
  if (st::loop_free(*prev).holds) {
    for (std::size_t i = 0; i < trace.snapshots.size(); ++i) {
      st::Verdict v = st::loop_free(trace.snapshots[i]);
      if (!v.holds) {
        lf = st::Verdict::fail("step " + std::to_string(trace.steps[i].step) + ": " + v.witness);
        break;
      }
    }
  } else {
    lf = st::Verdict::fail("initial configuration has a parent cycle (not required to clear)");
    lf.holds = true;  // loop-freedom closure only binds traces that start loop-free
    lf.witness.clear();
  }
  st::print_verdict(std::cout, "loop_free_all_steps", lf);
  all_hold &= lf.holds;

  st::Verdict legit = st::legitimate(trace.final_config, strict);
  if (trace.budget_exceeded) {
    legit = st::Verdict::fail("step budget exceeded before legitimacy");
  }
  st::print_verdict(std::cout, "legitimate_final", legit);
  all_hold &= legit.holds;

  std::cout << "rounds " << st::rounds(trace) << '\n';

  // Passage verdict applies to single-crash runs from a legitimate start.
  if (sc.events.size() == 1 && st::is_crash_event(sc.events[0]) &&
      st::legitimate(trace.initial).holds) {
    st::Verdict passage = st::passage_holds(trace, sc.events[0]);
    st::print_verdict(std::cout, "passage", passage);
    all_hold &= passage.holds;
  }

  // Rule-fire summary, useful for eyeballing recovery scenarios.
  if (print_trace_flag) {
    std::vector<std::pair<st::NodeId, st::Rule>> seen;
    for (const auto& rec : trace.steps) {
      for (const auto& f : rec.firings) {
        if (std::find(seen.begin(), seen.end(), std::pair(f.node, f.rule)) == seen.end()) {
          seen.emplace_back(f.node, f.rule);
        }
      }
    }
    std::cout << "fired:";
    for (const auto& [v, r] : seen) std::cout << ' ' << sc.node_label(v) << ':' << rule_name(r);
    std::cout << '\n';
  }
  return all_hold ? 0 : 1;
}

int cmd_modelcheck(std::uint32_t n, const std::string& scenario_path, st::Level cap,
                   std::uint64_t max_states) {
  std::vector<st::DynamicGraph> graphs;
  if (!scenario_path.empty()) {
    const st::Scenario sc = st::load_scenario_file(scenario_path);
    graphs.push_back(*st::build_graph(sc));
  } else {
    if (n < 1 || n > 4) {
      std::cerr << "modelcheck: --n must be in [1,4]\n";
      return 2;
    }
    graphs = st::all_connected_rooted_graphs(n);
  }
  bool all_hold = true;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const auto& g = graphs[i];
    const st::Level use_cap =
        std::min<st::Level>(cap, 2 * static_cast<st::Level>(g.node_count()));
    std::cout << "graph " << i << " n=" << g.node_count() << " m=" << g.edge_count()
              << " cap=" << use_cap;
    st::ModelCheckOptions opts;
    opts.max_states = max_states;
    try {
      const auto res = st::model_check(g, use_cap, opts);
      std::cout << " states=" << res.capped_states << " reached=" << res.reached_states
                << " escapes=" << res.escape_transitions << '\n';
      st::print_verdict(std::cout, "convergence", res.convergence);
      st::print_verdict(std::cout, "loopfree_closure", res.loopfree_closure);
      st::print_verdict(std::cout, "legitimacy_closure", res.legitimacy_closure);
      all_hold &= res.overall().holds;
    } catch (const st::StateSpaceTooLarge& e) {
      std::cout << '\n';
      st::print_verdict(std::cout, "modelcheck", st::Verdict::fail(e.what()));
      all_hold = false;
    }
  }
  st::print_verdict(std::cout, "modelcheck_all", all_hold ? st::Verdict::ok()
                                                          : st::Verdict::fail("see lines above"));
  return all_hold ? 0 : 1;
}

int cmd_compose(const std::string& path, const std::string& slave_name) {
  auto kind = st::parse_slave_kind(slave_name);
  if (!kind) {
    std::cerr << "compose: unknown slave '" << slave_name << "'\n";
    return 2;
  }
  const st::Scenario sc = st::load_scenario_file(path);
  auto graph = st::build_graph(sc);

  st::ComposedConfiguration c0;
  if (sc.init.mode == st::InitMode::Random) {
    c0 = st::random_composed_configuration(graph, sc.init.seed);
  } else {
    c0.master = st::initial_configuration(sc, graph);
    c0.slave.resize(graph->id_bound());
  }

  st::ComposedRunOptions opts;
  opts.max_steps = sc.budget;
  opts.record = true;
  st::ComposedTrace trace = st::composed_run(c0, sc.daemon, *kind, sc.events, opts);

  bool all_hold = true;
  st::Verdict lf = st::Verdict::ok();
  if (st::loop_free(trace.initial.master).holds) {
    for (std::size_t i = 0; i < trace.snapshots.size(); ++i) {
      st::Verdict v = st::loop_free(trace.snapshots[i].master);
      if (!v.holds) {
        lf = st::Verdict::fail("step " + std::to_string(trace.steps[i].step) + ": " + v.witness);
        break;
      }
    }
  }
  st::print_verdict(std::cout, "loop_free_all_steps", lf);
  all_hold &= lf.holds;

  if (trace.budget_exceeded) {
    st::print_verdict(std::cout, "composed_fixpoint",
                      st::Verdict::fail("step budget exceeded before quiescence"));
    all_hold = false;
  }

  const st::EdgeSet tree = st::slave_output(trace.final_config, *kind);
  st::Verdict m = *kind == st::SlaveKind::OracleMinDegree
                      ? st::check_M_mindeg(*trace.final_config.master.graph, tree)
                      : st::check_M_maxflow(*trace.final_config.master.graph, tree);
  st::print_verdict(std::cout, "metric_M", m);
  all_hold &= m.holds;

  st::Verdict legit = st::legitimate(trace.final_config.master);
  st::print_verdict(std::cout, "legitimate_final", legit);
  all_hold &= legit.holds;

  std::cout << "rounds " << st::rounds(trace) << '\n';
  return all_hold ? 0 : 1;
}

int cmd_sweep(std::uint32_t n, std::uint32_t seeds, const std::string& daemon_name) {
  st::Daemon daemon;
  if (daemon_name == "central") {
    daemon = {st::DaemonKind::Central, 0, 0};
  } else if (daemon_name == "synchronous") {
    daemon = {st::DaemonKind::Synchronous, 0, 0};
  } else if (daemon_name == "adversarial") {
    daemon = {st::DaemonKind::Adversarial, 1, 2 * n};
  } else {
    std::cerr << "sweep: unknown daemon '" << daemon_name << "'\n";
    return 2;
  }
  std::uint64_t max_rounds = 0;
  double sum_rounds = 0;
  bool all_converged = true;
  std::cout << "seed rounds steps converged\n";
  for (std::uint32_t seed = 0; seed < seeds; ++seed) {
    auto g = std::make_shared<const st::DynamicGraph>(st::random_connected_graph(n, seed));
    st::Configuration c0 = st::random_configuration(g, seed * 7919u + 1);
    st::Daemon d = daemon;
    d.seed = seed;
    st::RunOptions opts;
    opts.max_steps = 200000;
    opts.stop = [](const st::Configuration& c) { return st::legitimate(c).holds; };
    st::ExecutionTrace t = st::run(c0, d, {}, opts);
    const bool ok = !t.budget_exceeded && st::legitimate(t.final_config).holds;
    all_converged &= ok;
    const std::uint64_t r = st::rounds(t);
    max_rounds = std::max(max_rounds, r);
    sum_rounds += static_cast<double>(r);
    std::cout << seed << ' ' << r << ' ' << t.steps_executed << ' ' << (ok ? "yes" : "no")
              << '\n';
  }
  std::cout << "max " << max_rounds << " mean " << (seeds ? sum_rounds / seeds : 0) << '\n';
  return all_converged ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator and verification harness for a loop-free super-stabilizing BFS "
               "spanning tree with fair composition"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string trace_level = "summary";
  bool strict = false;

  auto* run_cmd = app.add_subcommand("run", "execute a scenario and print trace plus verdicts");
  run_cmd->add_option("scenario", scenario_path, "scenario file")->required();
  run_cmd->add_option("--trace-level", trace_level, "summary|full")
      ->check(CLI::IsMember({"summary", "full"}));
  run_cmd->add_flag("--strict", strict, "require new_level == level in legitimacy");

  auto* check_cmd = app.add_subcommand("check", "verdicts only, exit 0 iff all hold");
  check_cmd->add_option("scenario", scenario_path, "scenario file")->required();
  check_cmd->add_flag("--strict", strict, "require new_level == level in legitimacy");

  std::uint32_t mc_n = 3;
  st::Level mc_cap = 6;
  std::uint64_t mc_max_states = st::ModelCheckOptions{}.max_states;
  std::string mc_scenario;
  auto* mc_cmd = app.add_subcommand("modelcheck", "exhaustive check of tiny instances");
  mc_cmd->add_option("--n", mc_n, "check all connected rooted graphs of this size (<= 4)");
  mc_cmd->add_option("--cap", mc_cap, "level cap (clamped to 2n per graph)");
  mc_cmd->add_option("--scenario", mc_scenario, "check this scenario's graph instead");
  mc_cmd->add_option("--max-states", mc_max_states, "state budget before refusing");

  std::string slave_name;
  auto* compose_cmd = app.add_subcommand("compose", "composed run with a slave protocol");
  compose_cmd->add_option("scenario", scenario_path, "scenario file")->required();
  compose_cmd->add_option("--slave", slave_name, "oracle-maxflow|oracle-mindegree|distributed-maxflow")
      ->required();

  std::uint32_t sweep_n = 10;
  std::uint32_t sweep_seeds = 20;
  std::string sweep_daemon = "central";
  auto* sweep_cmd = app.add_subcommand("sweep", "convergence-round statistics over random instances");
  sweep_cmd->add_option("--n", sweep_n, "graph size")->required();
  sweep_cmd->add_option("--seeds", sweep_seeds, "number of seeds")->required();
  sweep_cmd->add_option("--daemon", sweep_daemon, "central|synchronous|adversarial");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return run_scenario(scenario_path, true, trace_level == "full", strict);
    if (check_cmd->parsed()) return run_scenario(scenario_path, false, false, strict);
    if (mc_cmd->parsed()) return cmd_modelcheck(mc_n, mc_scenario, mc_cap, mc_max_states);
    if (compose_cmd->parsed()) return cmd_compose(scenario_path, slave_name);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_n, sweep_seeds, sweep_daemon);
  } catch (const st::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
