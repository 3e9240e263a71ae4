#pragma once

#include <filesystem>

#include "mwcons/scenario.hpp"
#include "mwcons/sim.hpp"

namespace mwcons {

/// Write trajectory.csv, controls.csv, events.csv, psi.csv and summary.txt
/// into `dir` (created if missing). Output is byte-deterministic: fixed
/// column order, numbers with 17 significant digits, LF line endings. An
/// empty record produces headers-only CSVs.
void write_outputs(const SimulationRecord& record, const Scenario& scenario,
                   const std::filesystem::path& dir);

}  // namespace mwcons
