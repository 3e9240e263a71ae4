#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mwcons/control.hpp"
#include "mwcons/matgraph.hpp"

namespace mwcons {

/// Communication regime of a run. Event modes broadcast on trigger firings;
/// continuous modes use the true states at every instant (no events).
enum class Mode {
  EventLeaderless,
  EventLeaderFollower,
  ContinuousLeaderless,
  ContinuousLeaderFollower,
};

inline bool is_event_mode(Mode m) {
  return m == Mode::EventLeaderless || m == Mode::EventLeaderFollower;
}
inline bool is_leader_mode(Mode m) {
  return m == Mode::EventLeaderFollower || m == Mode::ContinuousLeaderFollower;
}

std::string mode_name(Mode m);

/// Initial condition: either explicit per-agent states or seeded uniform
/// components on [lo, hi].
struct InitSpec {
  bool explicit_states = false;
  double lo = -1.0;
  double hi = 1.0;
  std::vector<Eigen::VectorXd> states;  // used when explicit_states
};

/// A fully validated run description. Instances produced by parse_scenario
/// satisfy every structural requirement (balance, assumptions, parameter
/// ranges, gains filled in), so simulation can rely on them unchecked.
struct Scenario {
  MatrixWeightedNetwork network;
  std::vector<TriggerParams> params;  // one per agent, gain populated
  Mode mode = Mode::EventLeaderless;
  SaturationLevel sat_level{1.0};
  double t_end = 0.0;
  double dt = 1e-3;
  double sample_dt = 1e-2;
  double refine_tol = 1e-6;
  std::uint64_t seed = 0;
  InitSpec init;
  double max_events_per_second = 1e4;
  double weight_tol = kDefaultClassifyTol;  // relative classification tol
};

/// Parse and validate scenario text. Grammar errors throw ParseError with
/// the offending line; semantic violations (imbalance, failed assumptions,
/// bad parameters, mode requirements) throw ValidationError.
Scenario parse_scenario(const std::string& text);

/// Convenience wrapper: read a file and parse its contents.
Scenario parse_scenario_file(const std::filesystem::path& path);

/// Render a scenario back to its canonical text form. The output re-parses
/// to an identical value (numbers are written with 17 significant digits).
std::string serialize_scenario(const Scenario& scenario);

}  // namespace mwcons
