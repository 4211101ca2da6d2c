// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dynsim/crowd/crowd.hpp"
#include "dynsim/crowd/orca.hpp"
#include "dynsim/world/world.hpp"

namespace dynsim {

struct RobotConfig {
  Vec2 start;
  Vec2 goal;
  double radius = 0.3;
  double max_speed = 1.0;
  double max_accel = 2.0;
  double avoidance_radius = 5.0;

  bool operator==(const RobotConfig&) const = default;
};

/// Hand-placed pedestrian. position == goal makes it stand still.
struct ScriptedPedestrian {
  Vec2 position;
  Vec2 goal;
  double radius = 0.3;
  double pref_speed = 1.0;
  double max_accel = 2.0;

  bool operator==(const ScriptedPedestrian&) const = default;
};

struct EpisodeConfig {
  std::shared_ptr<const Scene> scene;
  PedestrianConfig pedestrians;
  std::vector<ScriptedPedestrian> scripted;
  RobotConfig robot;
  OrcaParams orca;
  double dt = 0.1;
  double timeout = 60.0;
  double success_tolerance = 0.3;
  std::uint64_t seed = 0;
};

/// Throws std::invalid_argument naming the first broken field.
void validate_episode_config(const EpisodeConfig& cfg);

enum class Outcome { Success, Collision, Timeout, Aborted };

const char* to_string(Outcome o);
Outcome outcome_from_string(const std::string& s);

struct EpisodeResult {
  Outcome outcome = Outcome::Timeout;
  /// Elapsed simulated time; set only on Success.
  std::optional<double> nav_time;
  /// Smallest robot-to-pedestrian center distance seen (infinity if none).
  double min_human_distance = 0.0;
  double path_length = 0.0;
  std::uint64_t ticks = 0;
  std::uint64_t seed = 0;
  /// Policy failure message for Aborted episodes.
  std::string error;

  bool operator==(const EpisodeResult&) const = default;
};

/// Maps (world, robot id, robot goal) to the robot's velocity command.
using RobotPolicy = std::function<Vec2(const WorldState&, AgentId, const Vec2&)>;

/// The pedestrian ORCA pipeline applied to the robot with its own limits. The
/// preferred speed is capped so the robot does not overshoot its goal within
/// one tick.
RobotPolicy orca_robot_policy(const OrcaParams& params, double dt);

/// The robot is agent 0; scripted pedestrians follow, then the seeded crowd.
///
/// Each tick first checks for a collision, then success, then timeout, and
/// only then asks the policy, runs crowd_tick and steps. A policy exception or
/// an over-limit command ends the episode as Aborted.
EpisodeResult run_episode(const EpisodeConfig& cfg, const RobotPolicy& policy);

/// Builds the tick-0 world of an episode.
WorldState make_episode_world(const EpisodeConfig& cfg);

struct BenchMetrics {
  std::size_t episodes = 0;
  std::size_t aborted = 0;
  double success_rate = 0.0;
  double collision_rate = 0.0;
  double timeout_rate = 0.0;
  /// Mean nav_time over successes; empty without any.
  std::optional<double> avg_nav_time;

  bool operator==(const BenchMetrics&) const = default;
};

/// Rates over non-Aborted results. Throws std::invalid_argument if none.
BenchMetrics aggregate(std::span<const EpisodeResult> results);

}  // namespace dynsim
