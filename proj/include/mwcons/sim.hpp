#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mwcons/scenario.hpp"

namespace mwcons {

/// Per-agent integration state. `xhat` is the agent's last broadcast value;
/// the measurement error is xhat - x.
struct AgentRuntime {
  Eigen::VectorXd x;
  Eigen::VectorXd xhat;
  double psi = 0.0;
  double last_event_time = 0.0;
  int event_count = 0;
};

/// One broadcast: the firing agent and the refined firing time.
struct EventRecord {
  int agent;
  double time;
};

/// A batch of agents whose triggers fire at the same refined instant.
struct EventHit {
  double time;
  std::vector<int> agents;
};

/// Sampled trajectory of one run plus the full event log.
/// Outer index is the sample, inner index the agent.
struct SimulationRecord {
  std::vector<double> time;
  std::vector<std::vector<Eigen::VectorXd>> states;
  std::vector<std::vector<Eigen::VectorXd>> controls;  // applied (saturated)
  std::vector<std::vector<double>> psi;
  std::vector<std::vector<double>> trigger_excess;  // 0 in continuous modes
  std::vector<EventRecord> events;
  /// True when any control component reached the actuator limit (within
  /// 1e-9) at any integration step of the sample interval ending here.
  std::vector<bool> saturation_active;
  /// Time of the last sample whose interval saw saturation; empty when the
  /// whole run stayed unsaturated.
  std::optional<double> t_sf;
};

/// Advance every agent by one explicit 4th-order step of size `dt` starting
/// at time `t`. Event modes hold xhat constant: x moves at the constant
/// saturated rate and psi integrates its forced linear dynamics. Continuous
/// modes integrate x under the true-state control and leave psi untouched.
/// Throws NonFiniteStateError when a state leaves the finite range.
void integrate_interval(std::vector<AgentRuntime>& runtimes,
                        const MatrixWeightedNetwork& g,
                        const std::vector<TriggerParams>& params,
                        SaturationLevel level, double t, double dt, Mode mode);

/// Look for the first trigger crossing in (t, t + dt]. Requires every
/// trigger_excess <= 0 at t. Returns the crossing time refined by bisection
/// to within `refine_tol` (conservative side: the returned instant has
/// positive excess) together with all agents whose excess is >= 0 there,
/// or nullopt when no excess is positive at t + dt. Excursions that rise
/// and fall strictly inside one step are not observed; dt bounds the
/// detection resolution.
std::optional<EventHit> detect_event(const std::vector<AgentRuntime>& runtimes,
                                     const MatrixWeightedNetwork& g,
                                     const std::vector<TriggerParams>& params,
                                     SaturationLevel level, double t,
                                     double dt, double refine_tol, Mode mode);

/// Broadcast for every agent in `agents`: xhat <- x, event_count += 1,
/// last_event_time <- t_event. Controls are recomputed from xhat on demand,
/// so no further bookkeeping is required here.
void apply_events(std::vector<AgentRuntime>& runtimes,
                  const std::vector<int>& agents, double t_event);

/// Run a validated scenario to completion and sample every sample_dt.
/// Event modes log an initial broadcast for every agent at t = 0 and fire
/// same-instant cascades until all triggers are quiescent. A nonpositive
/// t_end yields an empty record. Throws ZenoGuardError when any agent
/// exceeds max_events_per_second over a sliding 1 s window and
/// NonFiniteStateError on numeric blow-up.
SimulationRecord run(const Scenario& scenario);

/// max over edges (i,j) of || x_i - sgn(A_ij) x_j ||; zero for edgeless
/// networks. The natural convergence measure on signed networks.
double bipartite_disagreement(const std::vector<Eigen::VectorXd>& x,
                              const MatrixWeightedNetwork& g);

/// Gauged average (1/n) sum_i sigma_i x_i at the last saturated sample
/// (the moment the run leaves the actuator limits), or at the first sample
/// when no saturation occurred. Predicts the leaderless consensus point.
Eigen::VectorXd predict_consensus_value(const SimulationRecord& record,
                                        const MatrixWeightedNetwork& g,
                                        const Gauge& gauge);

/// Event statistics plus the analytic minimum inter-event-gap bound
/// certifying the absence of accumulation points.
struct ZenoReport {
  std::vector<int> event_counts;                  // per agent
  std::vector<std::optional<double>> min_gaps;    // per agent; empty if < 2
  std::optional<double> overall_min_gap;          // min over agents
  std::vector<double> analytic_gap_bounds;        // per agent, at final time
  double state_bound = 0.0;  // largest sampled ||x_i|| (and input) magnitude
};

ZenoReport zeno_report(const SimulationRecord& record,
                       const MatrixWeightedNetwork& g,
                       const std::vector<TriggerParams>& params);

}  // namespace mwcons
