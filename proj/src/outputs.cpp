#include "mwcons/outputs.hpp"

#include <cmath>
#include <fstream>

#include "fmt_util.hpp"

namespace mwcons {

namespace {

using detail::fmt17;

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    throw std::runtime_error("cannot write " + path.string());
  }
  return file;
}

void write_grid_csv(const std::filesystem::path& path, const char* prefix,
                    const SimulationRecord& record,
                    const std::vector<std::vector<Eigen::VectorXd>>& series,
                    int n, int d) {
  std::ofstream file = open_for_write(path);
  file << "t";
  for (int i = 1; i <= n; ++i) {
    for (int k = 1; k <= d; ++k) {
      file << "," << prefix << "_" << i << "_" << k;
    }
  }
  file << "\n";
  for (std::size_t s = 0; s < record.time.size(); ++s) {
    file << fmt17(record.time[s]);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < d; ++k) {
        file << "," << fmt17(series[s][i](k));
      }
    }
    file << "\n";
  }
}

}  // namespace

void write_outputs(const SimulationRecord& record, const Scenario& scenario,
                   const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const MatrixWeightedNetwork& g = scenario.network;
  const int n = g.node_count();
  const int d = g.dim();

  write_grid_csv(dir / "trajectory.csv", "x", record, record.states, n, d);
  write_grid_csv(dir / "controls.csv", "u", record, record.controls, n, d);

  {
    std::ofstream file = open_for_write(dir / "psi.csv");
    file << "t";
    for (int i = 1; i <= n; ++i) file << ",psi_" << i;
    for (int i = 1; i <= n; ++i) file << ",excess_" << i;
    file << "\n";
    for (std::size_t s = 0; s < record.time.size(); ++s) {
      file << fmt17(record.time[s]);
      for (int i = 0; i < n; ++i) file << "," << fmt17(record.psi[s][i]);
      for (int i = 0; i < n; ++i) {
        file << "," << fmt17(record.trigger_excess[s][i]);
      }
      file << "\n";
    }
  }

  {
    std::ofstream file = open_for_write(dir / "events.csv");
    file << "agent,t\n";
    for (const EventRecord& ev : record.events) {
      file << ev.agent + 1 << "," << fmt17(ev.time) << "\n";
    }
  }

  {
    std::ofstream file = open_for_write(dir / "summary.txt");
    const bool leader = is_leader_mode(scenario.mode);
    file << "mode: " << mode_name(scenario.mode) << "\n";
    file << "agents: " << n << "\n";
    file << "dimension: " << d << "\n";
    file << "samples: " << record.time.size() << "\n";
    file << "t_end: " << fmt17(scenario.t_end) << "\n";

    const ZenoReport zeno = zeno_report(record, g, scenario.params);
    file << "events_total: " << record.events.size() << "\n";
    file << "events_per_agent:";
    for (int c : zeno.event_counts) file << " " << c;
    file << "\n";
    file << "min_inter_event_gap: "
         << (zeno.overall_min_gap ? fmt17(*zeno.overall_min_gap) : "none")
         << "\n";
    file << "t_sf: " << (record.t_sf ? fmt17(*record.t_sf) : "none") << "\n";

    if (record.time.empty()) {
      file << "final_bipartite_disagreement: none\n";
      file << "psi_final_min: none\n";
      return;
    }

    file << "final_bipartite_disagreement: "
         << fmt17(bipartite_disagreement(record.states.back(), g)) << "\n";
    double psi_min = record.psi.back()[0];
    for (double p : record.psi.back()) psi_min = std::min(psi_min, p);
    file << "psi_final_min: " << fmt17(psi_min) << "\n";

    if (!leader) {
      const auto gauge = find_gauge(g);
      if (gauge) {
        const Eigen::VectorXd predicted =
            predict_consensus_value(record, g, *gauge);
        Eigen::VectorXd final_avg = Eigen::VectorXd::Zero(d);
        for (int i = 0; i < n; ++i) {
          final_avg += static_cast<double>(gauge->signs[i]) *
                       record.states.back()[i];
        }
        final_avg /= static_cast<double>(n);
        file << "predicted_consensus:";
        for (int k = 0; k < d; ++k) file << " " << fmt17(predicted(k));
        file << "\n";
        file << "final_gauged_average:";
        for (int k = 0; k < d; ++k) file << " " << fmt17(final_avg(k));
        file << "\n";
        file << "prediction_error: " << fmt17((predicted - final_avg).norm())
             << "\n";
      }
    } else {
      const Eigen::VectorXd& w0 = g.inputs().front();
      file << "leader_reference:";
      for (int k = 0; k < d; ++k) file << " " << fmt17(w0(k));
      file << "\n";
      double tracking = 0.0;
      for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd dev = record.states.back()[i].cwiseAbs() -
                                    w0.cwiseAbs();
        tracking = std::max(tracking, dev.cwiseAbs().maxCoeff());
      }
      file << "leader_tracking_error: " << fmt17(tracking) << "\n";
    }
  }
}

}  // namespace mwcons
