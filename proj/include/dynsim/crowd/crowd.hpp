// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dynsim/crowd/orca.hpp"
#include "dynsim/world/world.hpp"

namespace dynsim {

struct Range {
  double min = 0.0;
  double max = 0.0;

  bool operator==(const Range&) const = default;
};

struct PedestrianConfig {
  std::size_t count = 0;
  Range pref_speed{0.8, 1.4};
  Range radius{0.25, 0.35};
  Range avoidance_radius{3.0, 5.0};
  Range max_accel{1.0, 3.0};
  GoalResample goal_resample = GoalResample::OnArrival;
  double arrival_tolerance = 0.3;
  std::size_t max_attempts = 1000;

  bool operator==(const PedestrianConfig&) const = default;
};

void validate_pedestrian_config(const PedestrianConfig& cfg);

/// Spawning found no free spot within max_attempts.
class PlacementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Uniform sample from the union of `regions` (area-weighted). An empty list
/// samples the whole scene bounds.
Vec2 sample_in_regions(Rng& rng, const std::vector<Rect>& regions, const Rect& bounds);

/// Adds cfg.count pedestrians with rejection-sampled positions and goals.
///
/// Per agent the draws are, in order: radius, preferred speed, avoidance
/// radius, max acceleration, then position attempts, then goal attempts.
/// Pedestrians cap their speed at the preferred speed. Also installs the
/// config's goal handling as the world's CrowdSettings.
WorldState spawn_pedestrians(WorldState world, const PedestrianConfig& cfg);

/// pref_speed toward the goal, or zero within `arrival_tolerance`.
Vec2 preferred_velocity(const Agent& agent, double arrival_tolerance);

/// Velocity command for every pedestrian. Robots act as neighbors only.
///
/// Goals reached under GoalResample::OnArrival are redrawn first, which is
/// the only mutation of `world` (goals and rng). A head-on
/// pedestrian pair has the lower id's preferred velocity turned by
/// kHeadOnTieBreak radians counter-clockwise.
VelocityCommands crowd_tick(WorldState& world, const OrcaParams& params, double dt);

inline constexpr double kHeadOnTieBreak = 1e-3;

/// Sine of the angular slack allowed by is_head_on.
inline constexpr double kHeadOnTolerance = 1e-2;

/// True when a and b approach each other along the line joining them with
/// anti-parallel preferred velocities, both within kHeadOnTolerance. The check
/// runs every tick, so a symmetric jam keeps receiving the rotation until it
/// unwinds.
bool is_head_on(const Agent& a, const Vec2& pref_a, const Agent& b, const Vec2& pref_b);

}  // namespace dynsim
