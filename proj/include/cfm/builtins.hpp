#pragma once

// Shape primitives and the named example problems.

#include <cfm/config.hpp>
#include <cfm/geometry.hpp>

#include <array>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cfm {

[[nodiscard]] BoundaryLoop disk_loop(Vec2 center, double radius);
[[nodiscard]] BoundaryLoop rect_loop(Vec2 lo, Vec2 hi);

/// Disk with a circular sector of angle `opening` removed, the gap centred on
/// direction `heading`: a 2pi - opening arc closed by two radii.
[[nodiscard]] BoundaryLoop pacman_loop(Vec2 center, double radius, double opening, double heading);
/// The two re-entrant corners where the radii meet the arc.
[[nodiscard]] std::array<Vec2, 2> pacman_lips(Vec2 center, double radius, double opening, double heading);

double droplet_radius(double t);
/// Angular parametrization of the droplet: odd, with zero slope at t = +-1.
double droplet_angle(double t);
[[nodiscard]] BoundaryLoop droplet_loop(Vec2 center);
/// Point where the two droplet ends meet.
[[nodiscard]] Vec2 droplet_cusp(Vec2 center);

/// Closed polar curve through tabulated (angle, radius) samples, periodic
/// Catmull-Rom interpolation in the angle.
[[nodiscard]] BoundaryLoop polar_table_loop(std::vector<std::pair<double, double>> samples, Vec2 center);

[[nodiscard]] std::vector<std::string> builtin_names();
/// Throws ConfigError for unknown names.
[[nodiscard]] ProblemConfig builtin_problem(std::string_view name);

}  // namespace cfm
