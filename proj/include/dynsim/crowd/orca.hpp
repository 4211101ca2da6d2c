// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dynsim/world/geometry.hpp"
#include "dynsim/world/scene.hpp"
#include "dynsim/world/world.hpp"

namespace dynsim {

struct OrcaParams {
  /// Look-ahead horizon for agent-agent velocity obstacles (seconds).
  double time_horizon_agents = 5.0;
  /// Look-ahead horizon for static obstacles (seconds).
  double time_horizon_obstacles = 2.0;
  std::size_t neighbor_limit = 10;
  /// Share of the avoidance effort taken by each agent of a pair.
  double reciprocity = 0.5;

  bool operator==(const OrcaParams&) const = default;
};

/// Throws std::invalid_argument on non-positive horizons, a zero neighbor
/// limit or reciprocity outside (0, 1].
void validate_orca_params(const OrcaParams& params);

/// Directed line in velocity space. Feasible velocities lie on its left:
/// det(direction, v - point) >= 0.
struct OrcaLine {
  Vec2 point;
  Vec2 direction;
};

/// Signed amount by which v violates the half-plane; <= 0 when feasible.
inline double violation(const OrcaLine& line, const Vec2& v) {
  return det(line.direction, line.point - v);
}

/// Half-planes for one agent. Static-obstacle lines come first and are kept
/// hard by the infeasible-case fallback.
struct OrcaConstraints {
  std::vector<OrcaLine> lines;
  std::size_t static_count = 0;
};

/// The neighbors self reacts to: agents within self.avoidance_radius, sorted
/// by (distance, id) and truncated to params.neighbor_limit.
std::vector<const Agent*> select_neighbors(const Agent& self, std::span<const Agent> agents,
                                           const OrcaParams& params);

/// Half-plane induced on self by one moving neighbor.
///
/// `self_is_lower` decides ties that have no geometric answer: the leg chosen
/// when the relative velocity lies exactly on the axis between the agents,
/// and the separation axis when the two centers coincide.
OrcaLine agent_line(const Agent& self, const Agent& other, double time_horizon, double dt,
                    double reciprocity, bool self_is_lower);

/// Half-plane induced by a static convex obstacle whose nearest boundary point
/// is `nearest` (`inside` when self's center lies within the obstacle).
///
/// The obstacle is replaced by its supporting line through `nearest`; the
/// approach speed toward it is capped so the clearance closes no sooner than
/// the horizon, or opens within one step when already overlapping. The
/// obstacle takes no share of the avoidance.
OrcaLine static_obstacle_line(const Agent& self, const Vec2& nearest, bool inside,
                              double time_horizon, double dt);

/// All ORCA half-planes for self. `neighbors` is filtered and truncated as
/// in select_neighbors; an entry with self's id is ignored.
OrcaConstraints orca_lines(const Agent& self, std::span<const Agent> neighbors, const Scene& scene,
                           const OrcaParams& params, double dt);

/// Same as above with the neighbor set already selected (and truncated).
OrcaConstraints orca_lines(const Agent& self, std::span<const Agent* const> selected,
                           const Scene& scene, const OrcaParams& params, double dt);

/// Velocity closest to pref_velocity inside the speed disc and on the
/// feasible side of every line. Lines are added incrementally in order. When
/// no such velocity exists, returns the velocity minimizing the largest
/// violation of the non-static lines while the first `static_count` lines
/// stay satisfied where possible.
Vec2 solve_velocity(std::span<const OrcaLine> lines, const Vec2& pref_velocity, double max_speed,
                    std::size_t static_count = 0);

}  // namespace dynsim
