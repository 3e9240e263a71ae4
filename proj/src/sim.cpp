#include "mwcons/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace mwcons {

namespace {

Eigen::VectorXd control_for(const MatrixWeightedNetwork& g, int i,
                            const std::vector<Eigen::VectorXd>& reference,
                            Mode mode) {
  return is_leader_mode(mode) ? control_leader_follower(g, i, reference)
                              : control_leaderless(g, i, reference);
}

std::vector<Eigen::VectorXd> broadcast_states(
    const std::vector<AgentRuntime>& runtimes) {
  std::vector<Eigen::VectorXd> xhat;
  xhat.reserve(runtimes.size());
  for (const AgentRuntime& rt : runtimes) xhat.push_back(rt.xhat);
  return xhat;
}

std::vector<Eigen::VectorXd> true_states(
    const std::vector<AgentRuntime>& runtimes) {
  std::vector<Eigen::VectorXd> x;
  x.reserve(runtimes.size());
  for (const AgentRuntime& rt : runtimes) x.push_back(rt.x);
  return x;
}

/// The controls in force right now: computed from broadcasts in event modes
/// and from the true states in continuous modes.
std::vector<Eigen::VectorXd> active_controls(
    const std::vector<AgentRuntime>& runtimes, const MatrixWeightedNetwork& g,
    Mode mode) {
  const std::vector<Eigen::VectorXd> reference =
      is_event_mode(mode) ? broadcast_states(runtimes) : true_states(runtimes);
  std::vector<Eigen::VectorXd> u(runtimes.size());
  for (int i = 0; i < static_cast<int>(runtimes.size()); ++i) {
    u[i] = control_for(g, i, reference, mode);
  }
  return u;
}

void require_finite(const std::vector<AgentRuntime>& runtimes, double t) {
  for (int i = 0; i < static_cast<int>(runtimes.size()); ++i) {
    if (!runtimes[i].x.allFinite() || !std::isfinite(runtimes[i].psi)) {
      std::ostringstream os;
      os << "agent " << i + 1 << " left the finite range near t = " << t;
      throw NonFiniteStateError(os.str());
    }
  }
}

}  // namespace

void integrate_interval(std::vector<AgentRuntime>& runtimes,
                        const MatrixWeightedNetwork& g,
                        const std::vector<TriggerParams>& params,
                        SaturationLevel level, double t, double dt,
                        Mode mode) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("integration step must be positive");
  }
  const int n = static_cast<int>(runtimes.size());
  if (is_event_mode(mode)) {
    const std::vector<Eigen::VectorXd> xhat = broadcast_states(runtimes);
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd u = control_for(g, i, xhat, mode);
      const Eigen::VectorXd sat_u = saturate(u, level);
      const Eigen::VectorXd e0 = runtimes[i].xhat - runtimes[i].x;
      // Between broadcasts the control is constant, so x moves linearly and
      // the measurement error is e0 - tau * sat_u along the step. psi gets a
      // classical 4th-order step against that exactly known forcing.
      const auto rate = [&](double tau, double p) {
        return psi_rate(e0 - tau * sat_u, u, p, params[i], level);
      };
      const double p0 = runtimes[i].psi;
      const double k1 = rate(0.0, p0);
      const double k2 = rate(0.5 * dt, p0 + 0.5 * dt * k1);
      const double k3 = rate(0.5 * dt, p0 + 0.5 * dt * k2);
      const double k4 = rate(dt, p0 + dt * k3);
      runtimes[i].psi = p0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      runtimes[i].x += dt * sat_u;
    }
  } else {
    const std::vector<Eigen::VectorXd> x0 = true_states(runtimes);
    const auto field = [&](const std::vector<Eigen::VectorXd>& xs) {
      std::vector<Eigen::VectorXd> f(n);
      for (int i = 0; i < n; ++i) {
        f[i] = saturate(control_for(g, i, xs, mode), level);
      }
      return f;
    };
    const auto shifted = [&](const std::vector<Eigen::VectorXd>& dir,
                             double c) {
      std::vector<Eigen::VectorXd> out(n);
      for (int i = 0; i < n; ++i) out[i] = x0[i] + c * dir[i];
      return out;
    };
    const auto k1 = field(x0);
    const auto k2 = field(shifted(k1, 0.5 * dt));
    const auto k3 = field(shifted(k2, 0.5 * dt));
    const auto k4 = field(shifted(k3, dt));
    for (int i = 0; i < n; ++i) {
      runtimes[i].x +=
          dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
  }
  require_finite(runtimes, t + dt);
}

std::optional<EventHit> detect_event(const std::vector<AgentRuntime>& runtimes,
                                     const MatrixWeightedNetwork& g,
                                     const std::vector<TriggerParams>& params,
                                     SaturationLevel level, double t,
                                     double dt, double refine_tol, Mode mode) {
  if (!(dt > 0.0)) return std::nullopt;
  if (!(refine_tol > 0.0)) {
    throw std::invalid_argument("refinement tolerance must be positive");
  }
  const int n = static_cast<int>(runtimes.size());
  // Broadcast values do not change inside the window, so the controls are
  // fixed for every probe.
  const std::vector<Eigen::VectorXd> xhat = broadcast_states(runtimes);
  std::vector<Eigen::VectorXd> u(n);
  for (int i = 0; i < n; ++i) u[i] = control_for(g, i, xhat, mode);

  struct Probe {
    double max_excess;
    std::vector<int> firing;
  };
  const auto probe_at = [&](double s) {
    std::vector<AgentRuntime> trial = runtimes;
    if (s > t) integrate_interval(trial, g, params, level, t, s - t, mode);
    Probe probe{-std::numeric_limits<double>::infinity(), {}};
    for (int i = 0; i < n; ++i) {
      const double excess =
          trigger_excess(trial[i].xhat - trial[i].x, u[i], trial[i].psi,
                         params[i], level);
      probe.max_excess = std::max(probe.max_excess, excess);
      if (excess >= 0.0) probe.firing.push_back(i);
    }
    return probe;
  };

  if (!(probe_at(t + dt).max_excess > 0.0)) return std::nullopt;
  double lo = t;
  double hi = t + dt;
  while (hi - lo > refine_tol) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;  // at floating-point resolution
    if (probe_at(mid).max_excess > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  Probe final_probe = probe_at(hi);
  return EventHit{hi, std::move(final_probe.firing)};
}

void apply_events(std::vector<AgentRuntime>& runtimes,
                  const std::vector<int>& agents, double t_event) {
  for (int i : agents) {
    runtimes[i].xhat = runtimes[i].x;
    runtimes[i].event_count += 1;
    runtimes[i].last_event_time = t_event;
  }
}

namespace {

std::vector<Eigen::VectorXd> initial_states(const Scenario& scenario) {
  const int n = scenario.network.node_count();
  const int d = scenario.network.dim();
  if (scenario.init.explicit_states) return scenario.init.states;
  std::vector<Eigen::VectorXd> x(n, Eigen::VectorXd(d));
  std::mt19937_64 engine(scenario.seed);
  // Map raw engine words to [0, 1) directly; the engine's output sequence is
  // standardized, so this keeps initial conditions identical across
  // platforms and standard-library implementations.
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) {
      const double unit =
          static_cast<double>(engine() >> 11) * 0x1.0p-53;
      x[i](k) = scenario.init.lo + (scenario.init.hi - scenario.init.lo) * unit;
    }
  }
  return x;
}

}  // namespace

SimulationRecord run(const Scenario& scenario) {
  const MatrixWeightedNetwork& g = scenario.network;
  const int n = g.node_count();
  SimulationRecord record;
  if (!(scenario.t_end > 0.0)) return record;
  const bool event_mode = is_event_mode(scenario.mode);
  const double limit = scenario.sat_level.value;

  std::vector<AgentRuntime> runtimes(n);
  {
    const std::vector<Eigen::VectorXd> x0 = initial_states(scenario);
    for (int i = 0; i < n; ++i) {
      runtimes[i].x = x0[i];
      runtimes[i].xhat = x0[i];
      runtimes[i].psi = scenario.params[i].psi0;
      runtimes[i].last_event_time = 0.0;
      runtimes[i].event_count = 0;
    }
  }

  std::vector<std::deque<double>> recent_events(n);
  const auto log_event = [&](int agent, double time) {
    record.events.push_back({agent, time});
    std::deque<double>& window = recent_events[agent];
    window.push_back(time);
    while (!window.empty() && window.front() <= time - 1.0) {
      window.pop_front();
    }
    if (static_cast<double>(window.size()) >
        scenario.max_events_per_second) {
      std::ostringstream os;
      os << "agent " << agent + 1 << " fired " << window.size()
         << " events within one second near t = " << time
         << " (runaway-trigger guard)";
      throw ZenoGuardError(os.str());
    }
  };

  const auto fire_batch = [&](const std::vector<int>& agents, double time) {
    apply_events(runtimes, agents, time);
    for (int i : agents) log_event(i, time);
  };

  // After a batch of broadcasts, neighbors' controls jump; any trigger that
  // is non-negative under the new broadcasts fires at the same instant.
  // Firing zeroes the agent's own error, so each pass strictly shrinks the
  // candidate set and the loop terminates.
  const auto cascade = [&](double time) {
    for (;;) {
      const std::vector<Eigen::VectorXd> u =
          active_controls(runtimes, g, scenario.mode);
      std::vector<int> due;
      for (int i = 0; i < n; ++i) {
        const double excess = trigger_excess(
            runtimes[i].xhat - runtimes[i].x, u[i], runtimes[i].psi,
            scenario.params[i], scenario.sat_level);
        if (excess >= 0.0) due.push_back(i);
      }
      if (due.empty()) return;
      fire_batch(due, time);
    }
  };

  const auto saturated_now = [&]() {
    const std::vector<Eigen::VectorXd> u =
        active_controls(runtimes, g, scenario.mode);
    for (const Eigen::VectorXd& ui : u) {
      if (ui.cwiseAbs().maxCoeff() >= limit - 1e-9) return true;
    }
    return false;
  };

  const auto record_sample = [&](double time, bool saturation_seen) {
    record.time.push_back(time);
    const std::vector<Eigen::VectorXd> u =
        active_controls(runtimes, g, scenario.mode);
    std::vector<Eigen::VectorXd> states(n), controls(n);
    std::vector<double> psis(n), excesses(n);
    for (int i = 0; i < n; ++i) {
      states[i] = runtimes[i].x;
      controls[i] = saturate(u[i], scenario.sat_level);
      psis[i] = runtimes[i].psi;
      excesses[i] =
          event_mode
              ? trigger_excess(runtimes[i].xhat - runtimes[i].x, u[i],
                               runtimes[i].psi, scenario.params[i],
                               scenario.sat_level)
              : 0.0;
    }
    record.states.push_back(std::move(states));
    record.controls.push_back(std::move(controls));
    record.psi.push_back(std::move(psis));
    record.trigger_excess.push_back(std::move(excesses));
    record.saturation_active.push_back(saturation_seen);
  };

  if (event_mode) {
    std::vector<int> everyone(n);
    std::iota(everyone.begin(), everyone.end(), 0);
    fire_batch(everyone, 0.0);
  }
  record_sample(0.0, saturated_now());

  const double end_eps = 1e-12 * std::max(1.0, scenario.t_end);
  double t = 0.0;
  long sample_idx = 1;
  while (t < scenario.t_end - end_eps) {
    double t_target = static_cast<double>(sample_idx) * scenario.sample_dt;
    if (t_target >= scenario.t_end - end_eps) t_target = scenario.t_end;
    bool saturation_seen = false;
    while (t < t_target - end_eps) {
      saturation_seen = saturation_seen || saturated_now();
      const double h = std::min(scenario.dt, t_target - t);
      if (event_mode) {
        const std::optional<EventHit> hit =
            detect_event(runtimes, g, scenario.params, scenario.sat_level, t,
                         h, scenario.refine_tol, scenario.mode);
        if (hit) {
          if (hit->time > t) {
            integrate_interval(runtimes, g, scenario.params,
                               scenario.sat_level, t, hit->time - t,
                               scenario.mode);
          }
          t = hit->time;
          fire_batch(hit->agents, t);
          cascade(t);
          continue;
        }
      }
      integrate_interval(runtimes, g, scenario.params, scenario.sat_level, t,
                         h, scenario.mode);
      t += h;
      if (std::abs(t - t_target) <= 1e-9 * std::max(1.0, t_target)) {
        t = t_target;
      }
    }
    t = t_target;
    saturation_seen = saturation_seen || saturated_now();
    record_sample(t, saturation_seen);
    ++sample_idx;
  }

  for (int k = static_cast<int>(record.time.size()) - 1; k >= 0; --k) {
    if (record.saturation_active[k]) {
      record.t_sf = record.time[k];
      break;
    }
  }
  return record;
}

double bipartite_disagreement(const std::vector<Eigen::VectorXd>& x,
                              const MatrixWeightedNetwork& g) {
  double worst = 0.0;
  for (const auto& [key, w] : g.edges()) {
    const double gap =
        (x[key.first] -
         static_cast<double>(weight_sign(w)) * x[key.second])
            .norm();
    worst = std::max(worst, gap);
  }
  return worst;
}

Eigen::VectorXd predict_consensus_value(const SimulationRecord& record,
                                        const MatrixWeightedNetwork& g,
                                        const Gauge& gauge) {
  if (record.time.empty()) {
    throw std::invalid_argument("cannot predict from an empty record");
  }
  int idx = 0;  // the initial sample when the run never saturated
  for (int k = static_cast<int>(record.time.size()) - 1; k >= 0; --k) {
    if (record.saturation_active[k]) {
      idx = k;
      break;
    }
  }
  const int n = g.node_count();
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(g.dim());
  for (int i = 0; i < n; ++i) {
    avg += static_cast<double>(gauge.signs[i]) * record.states[idx][i];
  }
  return avg / static_cast<double>(n);
}

ZenoReport zeno_report(const SimulationRecord& record,
                       const MatrixWeightedNetwork& g,
                       const std::vector<TriggerParams>& params) {
  const int n = g.node_count();
  ZenoReport report;
  report.event_counts.assign(n, 0);
  report.min_gaps.assign(n, std::nullopt);
  std::vector<std::optional<double>> last_time(n);
  for (const EventRecord& ev : record.events) {
    report.event_counts[ev.agent] += 1;
    if (last_time[ev.agent]) {
      const double gap = ev.time - *last_time[ev.agent];
      if (!report.min_gaps[ev.agent] || gap < *report.min_gaps[ev.agent]) {
        report.min_gaps[ev.agent] = gap;
      }
    }
    last_time[ev.agent] = ev.time;
  }
  for (const auto& gap : report.min_gaps) {
    if (!gap) continue;
    if (!report.overall_min_gap || *gap < *report.overall_min_gap) {
      report.overall_min_gap = gap;
    }
  }

  double bound_scale = 0.0;
  for (const auto& sample : record.states) {
    for (const Eigen::VectorXd& x : sample) {
      bound_scale = std::max(bound_scale, x.norm());
    }
  }
  for (const Eigen::VectorXd& w : g.inputs()) {
    bound_scale = std::max(bound_scale, w.norm());
  }
  report.state_bound = bound_scale;

  // Lower bound on the inter-event gap at the end of the run: the error
  // needed to re-arm the trigger grows like sqrt(psi / (theta gain)), and
  // the error slew rate is capped by the coupling strengths times the
  // largest state magnitude.
  const double horizon = record.time.empty() ? 0.0 : record.time.back();
  report.analytic_gap_bounds.assign(n,
                                    std::numeric_limits<double>::infinity());
  for (int i = 0; i < n; ++i) {
    double coupling = 0.0;
    for (int j : g.neighbors(i)) {
      coupling += lambda_max_abs(g.weight(i, j));
    }
    for (const auto& [key, w] : g.leader_edges()) {
      if (key.first == i) coupling += lambda_max_abs(w);
    }
    const TriggerParams& p = params[i];
    if (coupling <= 0.0 || p.gain <= 0.0 || bound_scale <= 0.0) continue;
    const double decay = 0.5 * (p.beta + p.delta / p.theta) * horizon;
    report.analytic_gap_bounds[i] =
        std::sqrt(p.psi0 / (p.theta * p.gain)) * std::exp(-decay) /
        (2.0 * bound_scale * coupling);
  }
  return report;
}

}  // namespace mwcons
