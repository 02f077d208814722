#pragma once

/// @file report.hpp
/// @brief Text artifacts: trajectory and diagnostics CSV, SVG frames.

#include <iosfwd>
#include <string>
#include <vector>

#include "msweep/geometry.hpp"
#include "msweep/sweeper.hpp"

namespace msweep {

/// Columns t,particle_id,x1,x2,v1,v2 with 17 significant digits. Rows without a
/// recorded velocity (the last mesh time of an aborted run) carry nan.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

/// Columns t,invariant,value,bound,pass.
void write_diagnostics_csv(std::ostream& os, const std::vector<InvariantRow>& rows);

/// One frame in math orientation over `workspace`: obstacles, wall, exit and
/// particles (class="particle").
std::string render_frame_svg(const Trajectory& traj, std::size_t mesh_index, const Box& workspace);

/// Reads a cloud from CSV. Uses the x1,x2 columns; when a t column is present
/// only the rows at the largest t are kept.
std::vector<Vec2> read_cloud_csv(std::istream& in);

}  // namespace msweep
