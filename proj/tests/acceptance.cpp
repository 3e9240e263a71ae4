// End-to-end acceptance checks for the simulator. Each criterion prints one
// [PASS]/[FAIL] line with the measured numbers; the process exits nonzero if
// any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mwcons/cli.hpp"
#include "mwcons/control.hpp"
#include "mwcons/matgraph.hpp"
#include "mwcons/outputs.hpp"
#include "mwcons/scenario.hpp"
#include "mwcons/sim.hpp"
#include "test_util.hpp"

using namespace mwcons;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

struct Result {
  bool pass = false;
  std::string detail;
};

void run_criterion(const char* id, const char* what,
                   const std::function<Result()>& fn) {
  Result r;
  try {
    r = fn();
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = std::string("exception: ") + e.what();
  }
  std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << id << ": " << what;
  if (!r.detail.empty()) std::cout << " (" << r.detail << ")";
  std::cout << std::endl;
  if (!r.pass) ++g_failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct RunCase {
  Scenario scenario;
  SimulationRecord record;
  double wall_seconds = 0.0;
};

std::vector<RunCase> run_seeds(const char* file, int seed_lo, int seed_hi) {
  std::vector<RunCase> out;
  for (int seed = seed_lo; seed <= seed_hi; ++seed) {
    RunCase rc{parse_scenario_file(mwtest::scenario_path(file)), {}, 0.0};
    rc.scenario.seed = static_cast<std::uint64_t>(seed);
    const auto t0 = std::chrono::steady_clock::now();
    rc.record = run(rc.scenario);
    rc.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    out.push_back(std::move(rc));
  }
  return out;
}

double tracking_error(const RunCase& rc) {
  const Eigen::VectorXd w_abs =
      rc.scenario.network.inputs()[0].cwiseAbs();
  double worst = 0.0;
  for (const Eigen::VectorXd& x : rc.record.states.back()) {
    worst = std::max(worst, (x.cwiseAbs() - w_abs).cwiseAbs().maxCoeff());
  }
  return worst;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// ---------------------------------------------------------------------------

Result gains_match_reference() {
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream out, err;
  const int rc_ll =
      cli({"params", mwtest::scenario_path("g1_leaderless.toml")}, out, err);
  const int rc_lf = cli({"params", mwtest::scenario_path(
                                       "g1_leader_follower.toml")},
                        out, err);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  const Scenario ll =
      parse_scenario_file(mwtest::scenario_path("g1_leaderless.toml"));
  const Scenario lf =
      parse_scenario_file(mwtest::scenario_path("g1_leader_follower.toml"));
  const double ref_varpi[5] = {6620.0, 10212.0, 6355.0, 3880.0, 7144.0};
  const double ref_omega[5] = {10004.0, 10212.0, 6355.0, 3880.0, 13027.0};
  double worst = 0.0;
  for (int i = 0; i < 5; ++i) {
    worst = std::max(worst, std::abs(ll.params[i].gain - ref_varpi[i]) /
                                ref_varpi[i]);
    worst = std::max(worst, std::abs(lf.params[i].gain - ref_omega[i]) /
                                ref_omega[i]);
  }
  const bool pass = rc_ll == 0 && rc_lf == 0 && worst <= 0.01 && wall < 1.0;
  return {pass, "worst gain deviation " + fmt(100.0 * worst) + "%, " +
                    fmt(wall) + " s"};
}

Result seeded_runs_reproducible() {
  Scenario a =
      parse_scenario_file(mwtest::scenario_path("g1_leaderless.toml"));
  Scenario b =
      parse_scenario_file(mwtest::scenario_path("g1_leaderless.toml"));
  a.seed = 7;
  b.seed = 7;
  const SimulationRecord ra = run(a);
  const SimulationRecord rb = run(b);

  bool same = ra.events.size() == rb.events.size();
  if (same) {
    for (std::size_t k = 0; k < ra.events.size(); ++k) {
      same = same && ra.events[k].agent == rb.events[k].agent &&
             ra.events[k].time == rb.events[k].time;
    }
  }
  for (std::size_t i = 0; same && i < ra.states.back().size(); ++i) {
    same = (ra.states.back()[i] - rb.states.back()[i]).cwiseAbs().maxCoeff()
               == 0.0;
  }

  const fs::path dir_a = fs::temp_directory_path() / "mwcons_acc_a";
  const fs::path dir_b = fs::temp_directory_path() / "mwcons_acc_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  write_outputs(ra, a, dir_a.string());
  write_outputs(rb, b, dir_b.string());
  bool bytes_equal = true;
  for (const char* name : {"trajectory.csv", "controls.csv", "psi.csv",
                           "events.csv", "summary.txt"}) {
    bytes_equal = bytes_equal && slurp(dir_a / name) == slurp(dir_b / name);
  }
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);

  return {same && bytes_equal,
          std::to_string(ra.events.size()) +
              " broadcasts identical, output files byte-identical"};
}

Result leaderless_consensus(const std::vector<RunCase>& runs) {
  double worst_gap = 0.0;
  double worst_wall = 0.0;
  for (const RunCase& rc : runs) {
    worst_gap = std::max(
        worst_gap,
        bipartite_disagreement(rc.record.states.back(), rc.scenario.network));
    worst_wall = std::max(worst_wall, rc.wall_seconds);
  }
  const bool pass = worst_gap <= 1e-2 && worst_wall < 30.0;
  return {pass, "worst disagreement " + fmt(worst_gap) + ", slowest run " +
                    fmt(worst_wall) + " s"};
}

Result leader_tracking(const std::vector<RunCase>& runs) {
  double worst = 0.0;
  double worst_wall = 0.0;
  for (const RunCase& rc : runs) {
    worst = std::max(worst, tracking_error(rc));
    worst_wall = std::max(worst_wall, rc.wall_seconds);
  }
  const bool pass = worst <= 1e-2 && worst_wall < 30.0;
  return {pass, "worst modulus error " + fmt(worst) + ", slowest run " +
                    fmt(worst_wall) + " s"};
}

Result consensus_prediction(const std::vector<RunCase>& runs) {
  double worst = 0.0;
  for (const RunCase& rc : runs) {
    if (!rc.record.t_sf.has_value()) {
      return {false, "a run never saturated, nothing to predict from"};
    }
    const auto gauge = *find_gauge(rc.scenario.network);
    const Eigen::VectorXd predicted =
        predict_consensus_value(rc.record, rc.scenario.network, gauge);
    Eigen::VectorXd final_avg =
        Eigen::VectorXd::Zero(rc.scenario.network.dim());
    const auto& final_states = rc.record.states.back();
    for (std::size_t i = 0; i < final_states.size(); ++i) {
      final_avg += static_cast<double>(gauge.signs[i]) * final_states[i];
    }
    final_avg /= static_cast<double>(final_states.size());
    worst = std::max(worst, (predicted - final_avg).norm());
  }
  return {worst <= 2e-2, "worst prediction error " + fmt(worst)};
}

Result psi_stays_above_floor(const std::vector<RunCase>& runs) {
  double worst_margin = std::numeric_limits<double>::infinity();
  for (const RunCase& rc : runs) {
    for (std::size_t k = 0; k < rc.record.time.size(); ++k) {
      const double t = rc.record.time[k];
      for (std::size_t i = 0; i < rc.record.psi[k].size(); ++i) {
        const TriggerParams& p = rc.scenario.params[i];
        const double floor =
            p.psi0 * std::exp(-(p.beta + p.delta / p.theta) * t);
        worst_margin =
            std::min(worst_margin, rc.record.psi[k][i] - floor);
      }
    }
  }
  return {worst_margin >= -1e-6, "worst margin " + fmt(worst_margin)};
}

Result trigger_excess_nonpositive(const std::vector<RunCase>& runs) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const RunCase& rc : runs) {
    for (const auto& sample : rc.record.trigger_excess) {
      for (double e : sample) worst = std::max(worst, e);
    }
  }
  return {worst <= 1e-4, "max sampled excess " + fmt(worst)};
}

Result events_stay_separated(const std::vector<RunCase>& runs) {
  double smallest = std::numeric_limits<double>::infinity();
  for (const RunCase& rc : runs) {
    const ZenoReport report =
        zeno_report(rc.record, rc.scenario.network, rc.scenario.params);
    if (!report.overall_min_gap.has_value()) {
      return {false, "a run produced no repeat broadcasts to measure"};
    }
    if (*report.overall_min_gap <= rc.scenario.refine_tol) {
      return {false, "gap " + fmt(*report.overall_min_gap) +
                         " at or below the refinement tolerance"};
    }
    smallest = std::min(smallest, *report.overall_min_gap);
  }
  return {true, "smallest inter-event gap " + fmt(smallest)};
}

Result energy_non_increasing(const std::vector<RunCase>& event_runs) {
  double worst_increase = 0.0;
  for (const RunCase& rc : event_runs) {
    const MatrixWeightedNetwork& net = rc.scenario.network;
    const bool leader = is_leader_mode(rc.scenario.mode);
    const Eigen::MatrixXd quad =
        leader ? leader_laplacian(net) : laplacian(net);
    Eigen::VectorXd offset =
        Eigen::VectorXd::Zero(net.node_count() * net.dim());
    if (leader) {
      const auto aug = find_augmented_gauge(net);
      if (!aug.has_value()) {
        return {false, "augmented sign assignment unavailable"};
      }
      const Eigen::VectorXd& w = net.inputs()[0];
      for (int i = 0; i < net.node_count(); ++i) {
        offset.segment(i * net.dim(), net.dim()) =
            static_cast<double>(aug->input_sign * aug->agent_signs.signs[i]) *
            w;
      }
    }
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < rc.record.time.size(); ++k) {
      Eigen::VectorXd z(net.node_count() * net.dim());
      for (int i = 0; i < net.node_count(); ++i) {
        z.segment(i * net.dim(), net.dim()) = rc.record.states[k][i];
      }
      z -= offset;
      double value = z.dot(quad * z);
      for (double p : rc.record.psi[k]) value += p;
      if (k > 0) worst_increase = std::max(worst_increase, value - previous);
      previous = value;
    }
  }
  return {worst_increase <= 1e-6,
          "largest per-sample increase " + fmt(worst_increase)};
}

Result randomized_properties() {
  mwtest::TestRng rng(1001);

  // Saturated effort never exceeds the raw effort.
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = rng.uniform_int(1, 6);
    const Eigen::VectorXd h = mwtest::random_vector(rng, d, -3.0, 3.0);
    const SaturationLevel level(rng.uniform(0.05, 2.0));
    const Eigen::VectorXd s = saturate(h, level);
    if (s.dot(s) > h.dot(s) + 1e-12) {
      return {false, "saturation effort inequality violated"};
    }
  }

  // The network quadratic form decomposes over edges and stays nonnegative.
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = rng.uniform_int(2, 6);
    const int d = rng.uniform_int(1, 3);
    const MatrixWeightedNetwork g =
        mwtest::random_balanced_network(rng, n, d);
    std::vector<Eigen::VectorXd> x;
    for (int i = 0; i < n; ++i) x.push_back(mwtest::random_vector(rng, d));
    const Eigen::VectorXd z = mwtest::stack(x);
    const double lhs = z.dot(laplacian(g) * z);
    double rhs = 0.0;
    for (const auto& [key, w] : g.edges()) {
      const double sign = (w.definiteness() == Definiteness::PosDef ||
                           w.definiteness() == Definiteness::PosSemiDef)
                              ? 1.0
                              : -1.0;
      const Eigen::VectorXd diff = x[key.first] - sign * x[key.second];
      rhs += diff.dot((sign * w.entries()) * diff);
    }
    const double scale = std::max(1.0, std::abs(lhs));
    if (std::abs(lhs - rhs) > 1e-9 * scale || lhs < -1e-9 * scale) {
      return {false, "laplacian quadratic form decomposition violated"};
    }
  }

  // Per-agent controls agree with the stacked operator form.
  for (int trial = 0; trial < 100; ++trial) {
    const int n = rng.uniform_int(2, 6);
    const int d = rng.uniform_int(1, 3);
    const MatrixWeightedNetwork g = mwtest::random_balanced_network(
        rng, n, d, nullptr, /*with_leaders=*/true);
    std::vector<Eigen::VectorXd> xhat;
    for (int i = 0; i < n; ++i) xhat.push_back(mwtest::random_vector(rng, d));
    const Eigen::VectorXd z = mwtest::stack(xhat);
    std::vector<Eigen::VectorXd> u(n);
    for (int i = 0; i < n; ++i) u[i] = control_leader_follower(g, i, xhat);
    Eigen::VectorXd w_stack(static_cast<int>(g.inputs().size()) * d);
    for (std::size_t l = 0; l < g.inputs().size(); ++l) {
      w_stack.segment(static_cast<int>(l) * d, d) = g.inputs()[l];
    }
    const Eigen::VectorXd expected =
        -(leader_laplacian(g) * z) + input_matrix(g) * w_stack;
    const double err = (mwtest::stack(u) - expected).cwiseAbs().maxCoeff();
    if (err > 1e-9 * std::max(1.0, expected.cwiseAbs().maxCoeff())) {
      return {false, "stacked control identity violated"};
    }
  }

  return {true, "2100 randomized trials"};
}

Result continuous_baselines() {
  Scenario ll =
      parse_scenario_file(mwtest::scenario_path("g1_leaderless.toml"));
  ll.mode = Mode::ContinuousLeaderless;
  ll.seed = 3;
  const SimulationRecord rl = run(ll);
  const double gap = bipartite_disagreement(rl.states.back(), ll.network);

  Scenario lf =
      parse_scenario_file(mwtest::scenario_path("g1_leader_follower.toml"));
  lf.mode = Mode::ContinuousLeaderFollower;
  lf.seed = 3;
  RunCase rc{lf, run(lf), 0.0};
  const double track = tracking_error(rc);

  const bool pass = rl.events.empty() && rc.record.events.empty() &&
                    gap <= 1e-2 && track <= 1e-2;
  return {pass, "0 broadcasts, disagreement " + fmt(gap) +
                    ", modulus error " + fmt(track)};
}

}  // namespace

int main() {
  const std::vector<RunCase> leaderless =
      run_seeds("g1_leaderless.toml", 1, 10);
  const std::vector<RunCase> leader =
      run_seeds("g1_leader_follower.toml", 1, 10);
  std::vector<RunCase> all;
  all.insert(all.end(), leaderless.begin(), leaderless.end());
  all.insert(all.end(), leader.begin(), leader.end());

  run_criterion("C1", "benchmark gain tables match the reference values",
                gains_match_reference);
  run_criterion("C2", "seeded runs are bitwise reproducible",
                seeded_runs_reproducible);
  run_criterion("C3", "leaderless benchmark reaches bipartite consensus",
                [&] { return leaderless_consensus(leaderless); });
  run_criterion("C4", "leader-follower benchmark tracks the reference "
                      "modulus",
                [&] { return leader_tracking(leader); });
  run_criterion("C5", "end-of-saturation average predicts the consensus",
                [&] { return consensus_prediction(leaderless); });
  run_criterion("C6", "auxiliary trigger states stay above the decay floor",
                [&] { return psi_stays_above_floor(all); });
  run_criterion("C7", "trigger excess is non-positive at every sample",
                [&] { return trigger_excess_nonpositive(all); });
  run_criterion("C8", "inter-event gaps stay above the refinement tolerance",
                [&] { return events_stay_separated(all); });
  run_criterion("C9", "the network energy function never increases",
                [&] { return energy_non_increasing(all); });
  run_criterion("C10", "randomized structural properties hold",
                randomized_properties);
  run_criterion("C11", "continuous baselines converge without broadcasts",
                continuous_baselines);

  std::cout << (11 - g_failures) << "/11 criteria passed" << std::endl;
  return g_failures == 0 ? 0 : 1;
}
