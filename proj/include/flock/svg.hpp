#pragma once

#include "flock/csv.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace flock {

/// Standalone SVG of the trajectories: one path per agent, obstacle disks,
/// a circle at each start and a cross at each end. The leader's path is drawn
/// thicker and in black.
std::string render_svg(const std::vector<TrajectoryRow>& rows, std::span<const Obstacle> obstacles,
                       std::optional<std::size_t> leader);

}  // namespace flock
