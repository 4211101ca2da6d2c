// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dynsim/world/geometry.hpp"
#include "dynsim/world/rng.hpp"
#include "dynsim/world/scene.hpp"

namespace dynsim {

using AgentId = std::uint32_t;

enum class AgentKind { Pedestrian, Robot };

struct Agent {
  AgentId id = 0;
  AgentKind kind = AgentKind::Pedestrian;
  Vec2 position;
  Vec2 velocity;
  double radius = 0.3;
  double pref_speed = 1.0;
  double max_speed = 1.0;
  double max_accel = 1.0;
  Vec2 goal;
  double avoidance_radius = 5.0;

  bool operator==(const Agent&) const = default;
};

/// Throws std::invalid_argument when an agent violates its field invariants.
void validate_agent(const Agent& agent);

enum class GoalResample { OnArrival, Never };

/// Goal-handling settings shared by every pedestrian in a world.
struct CrowdSettings {
  GoalResample goal_resample = GoalResample::OnArrival;
  double arrival_tolerance = 0.3;

  bool operator==(const CrowdSettings&) const = default;
};

class WorldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WorldState {
  double time = 0.0;
  std::uint64_t tick = 0;
  /// Sorted by id; every loop over agents runs in this order.
  std::vector<Agent> agents;
  std::shared_ptr<const Scene> scene;
  Rng rng;
  CrowdSettings crowd;
  AgentId next_id = 0;

  const Agent* find(AgentId id) const;
  Agent* find(AgentId id);

  bool operator==(const WorldState& o) const {
    return time == o.time && tick == o.tick && agents == o.agents &&
           (scene == o.scene || (scene && o.scene && *scene == *o.scene)) && rng == o.rng &&
           crowd == o.crowd && next_id == o.next_id;
  }
};

WorldState make_world(Scene scene, std::uint64_t seed);
/// Shares an already loaded scene between worlds.
WorldState make_world(std::shared_ptr<const Scene> scene, std::uint64_t seed);

/// Inserts the agent with a fresh id (ignoring agent.id) and returns that id.
AgentId add_agent(WorldState& world, Agent agent);

/// Removes the agent; returns false if no agent has that id.
bool remove_agent(WorldState& world, AgentId id);

using VelocityCommands = std::map<AgentId, Vec2>;

/// Advances the world by one fixed step.
///
/// Each commanded agent's velocity moves toward its command, limited to a
/// change of max_accel * dt; agents without a command keep their velocity.
/// Positions integrate semi-implicit Euler and are then projected to the
/// nearest point with clearance >= radius from obstacles and bounds. The
/// timestep must stay constant over a world's lifetime so time = tick * dt.
///
/// Throws WorldError for an unknown agent id and std::invalid_argument for
/// dt <= 0 or a command faster than the agent's max_speed.
WorldState step_world(const WorldState& world, double dt, const VelocityCommands& commands);

/// In-place variant of step_world with identical semantics.
void step_world_in_place(WorldState& world, double dt, const VelocityCommands& commands);

}  // namespace dynsim
