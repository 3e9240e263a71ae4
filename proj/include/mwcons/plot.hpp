#pragma once

#include <filesystem>

#include "mwcons/sim.hpp"

namespace mwcons {

enum class PlotKind { States, Controls, Events, Psi };

/// Render a self-contained SVG of the requested series. States and controls
/// get one panel per state component with all agents overlaid and a marker
/// at the end of the saturated phase; Events shows one broadcast row per
/// agent; Psi overlays the auxiliary trigger states. Throws
/// EmptySeriesError when the record holds no data of the requested kind.
void render_plot(const SimulationRecord& record, PlotKind kind,
                 const std::filesystem::path& path);

}  // namespace mwcons
