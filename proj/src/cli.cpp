#include "mwcons/cli.hpp"

#include <CLI11.hpp>

#include "fmt_util.hpp"
#include "mwcons/outputs.hpp"
#include "mwcons/plot.hpp"
#include "mwcons/scenario.hpp"
#include "mwcons/sim.hpp"

namespace mwcons {

namespace {

using detail::fmt17;
using detail::fmtg;

void print_gain_table(const Scenario& scenario, std::ostream& out) {
  const bool leader = is_leader_mode(scenario.mode);
  out << "error gains (" << (leader ? "omega" : "varpi") << "):\n";
  for (int i = 0; i < scenario.network.node_count(); ++i) {
    out << "  agent " << i + 1 << ": " << fmtg(scenario.params[i].gain, 10)
        << "\n";
  }
}

int do_check(const std::string& path, std::ostream& out) {
  const Scenario scenario = parse_scenario_file(path);
  const MatrixWeightedNetwork& g = scenario.network;
  out << "scenario: " << path << "\n";
  out << "mode: " << mode_name(scenario.mode) << "\n";
  out << "agents: " << g.node_count() << "\n";
  out << "dimension: " << g.dim() << "\n";
  const auto gauge = find_gauge(g);  // guaranteed by validation
  out << "partition V1:";
  for (int i = 0; i < g.node_count(); ++i) {
    if (gauge->signs[i] > 0) out << " " << i + 1;
  }
  out << "\npartition V2:";
  for (int i = 0; i < g.node_count(); ++i) {
    if (gauge->signs[i] < 0) out << " " << i + 1;
  }
  out << "\n";
  out << "balanced-connectivity check: "
      << (check_assumption1(g, *gauge) ? "satisfied" : "VIOLATED") << "\n";
  if (!g.inputs().empty() || !g.leader_edges().empty()) {
    out << "leader-coverage check: "
        << (check_assumption2(g) ? "satisfied" : "VIOLATED") << "\n";
  } else {
    out << "leader-coverage check: not applicable (no leaders)\n";
  }
  print_gain_table(scenario, out);
  return 0;
}

int do_params(const std::string& path, std::ostream& out) {
  const Scenario scenario = parse_scenario_file(path);
  print_gain_table(scenario, out);
  return 0;
}

void print_run_metrics(const Scenario& scenario,
                       const SimulationRecord& record, std::ostream& out) {
  out << "samples: " << record.time.size() << "\n";
  out << "events: " << record.events.size() << "\n";
  out << "t_sf: " << (record.t_sf ? fmtg(*record.t_sf, 6) : "none") << "\n";
  if (record.time.empty()) return;
  if (is_leader_mode(scenario.mode)) {
    const Eigen::VectorXd& w0 = scenario.network.inputs().front();
    double tracking = 0.0;
    for (const Eigen::VectorXd& x : record.states.back()) {
      tracking = std::max(
          tracking, (x.cwiseAbs() - w0.cwiseAbs()).cwiseAbs().maxCoeff());
    }
    out << "leader tracking error: " << fmtg(tracking, 6) << "\n";
  } else {
    out << "bipartite disagreement: "
        << fmtg(bipartite_disagreement(record.states.back(),
                                       scenario.network),
                6)
        << "\n";
  }
}

int do_run(const std::string& path, const std::string& out_dir, bool plots,
           std::ostream& out, std::ostream& err) {
  const Scenario scenario = parse_scenario_file(path);
  const SimulationRecord record = run(scenario);
  write_outputs(record, scenario, out_dir);
  if (plots) {
    const std::pair<PlotKind, const char*> kinds[] = {
        {PlotKind::States, "states"},
        {PlotKind::Controls, "controls"},
        {PlotKind::Events, "events"},
        {PlotKind::Psi, "psi"},
    };
    for (const auto& [kind, name] : kinds) {
      try {
        render_plot(record, kind,
                    std::filesystem::path(out_dir) /
                        (std::string(name) + ".svg"));
      } catch (const EmptySeriesError&) {
        err << "note: skipped " << name << " plot (no data)\n";
      }
    }
  }
  print_run_metrics(scenario, record, out);
  out << "outputs written to " << out_dir << "\n";
  return 0;
}

int do_compare(const std::string& path, std::ostream& out) {
  const Scenario base = parse_scenario_file(path);
  const bool leader = is_leader_mode(base.mode);
  Scenario event_scenario = base;
  event_scenario.mode =
      leader ? Mode::EventLeaderFollower : Mode::EventLeaderless;
  Scenario continuous_scenario = base;
  continuous_scenario.mode =
      leader ? Mode::ContinuousLeaderFollower : Mode::ContinuousLeaderless;

  const SimulationRecord event_record = run(event_scenario);
  const SimulationRecord continuous_record = run(continuous_scenario);

  out << "event-triggered run: " << event_record.events.size()
      << " broadcasts\n";
  out << "continuous baseline: communicates continuously ("
      << continuous_record.events.size() << " broadcasts logged)\n";
  if (!event_record.time.empty() && !continuous_record.time.empty()) {
    double gap = 0.0;
    for (std::size_t i = 0; i < event_record.states.back().size(); ++i) {
      gap = std::max(gap, (event_record.states.back()[i] -
                           continuous_record.states.back()[i])
                              .norm());
    }
    out << "final-state difference (max over agents): " << fmtg(gap, 6)
        << "\n";
  }
  out << "-- event-triggered metrics --\n";
  print_run_metrics(event_scenario, event_record, out);
  out << "-- continuous metrics --\n";
  print_run_metrics(continuous_scenario, continuous_record, out);
  return 0;
}

}  // namespace

int cli(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{
      "Simulator and analysis tools for saturated multi-agent consensus on "
      "matrix-weighted signed networks"};
  app.require_subcommand(1);

  std::string check_path;
  CLI::App* check_cmd = app.add_subcommand(
      "check", "Validate a scenario and print network diagnostics");
  check_cmd->add_option("scenario", check_path, "scenario file")->required();

  std::string params_path;
  CLI::App* params_cmd =
      app.add_subcommand("params", "Print the derived per-agent error gains");
  params_cmd->add_option("scenario", params_path, "scenario file")
      ->required();

  std::string run_path;
  std::string run_out;
  bool run_plots = false;
  CLI::App* run_cmd =
      app.add_subcommand("run", "Simulate a scenario and write outputs");
  run_cmd->add_option("scenario", run_path, "scenario file")->required();
  run_cmd->add_option("--out", run_out, "output directory")->required();
  run_cmd->add_flag("--plots", run_plots, "also render SVG plots");

  std::string compare_path;
  CLI::App* compare_cmd = app.add_subcommand(
      "compare",
      "Run the event-triggered protocol and its continuous counterpart");
  compare_cmd->add_option("scenario", compare_path, "scenario file")
      ->required();

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.push_back("mwcons");
  for (const std::string& a : args) argv_store.push_back(a);
  std::vector<char*> argv;
  argv.reserve(argv_store.size());
  for (std::string& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (check_cmd->parsed()) return do_check(check_path, out);
    if (params_cmd->parsed()) return do_params(params_path, out);
    if (run_cmd->parsed()) {
      return do_run(run_path, run_out, run_plots, out, err);
    }
    if (compare_cmd->parsed()) return do_compare(compare_path, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ZenoGuardError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const NonFiniteStateError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 4;
  }
  return 1;
}

}  // namespace mwcons
