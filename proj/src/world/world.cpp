// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "dynsim/world/world.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

namespace dynsim {

namespace {
constexpr double kSpeedSlack = 1e-9;
}  // namespace

double Rng::normal(double mean, double stddev) {
  double u1 = uniform01();
  while (u1 <= 0.0) {
    u1 = uniform01();
  }
  const double u2 = uniform01();
  return mean + stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void validate_agent(const Agent& a) {
  const std::string who = "agent " + std::to_string(a.id);
  if (!is_finite(a.position) || !is_finite(a.velocity) || !is_finite(a.goal)) {
    throw std::invalid_argument(who + ": non-finite state");
  }
  if (!(a.radius > 0.0)) {
    throw std::invalid_argument(who + ": radius must be positive");
  }
  if (!(a.pref_speed > 0.0) || a.pref_speed > a.max_speed) {
    throw std::invalid_argument(who + ": need 0 < pref_speed <= max_speed");
  }
  if (!(a.max_accel > 0.0)) {
    throw std::invalid_argument(who + ": max_accel must be positive");
  }
  if (norm(a.velocity) > a.max_speed + kSpeedSlack) {
    throw std::invalid_argument(who + ": velocity exceeds max_speed");
  }
}

const Agent* WorldState::find(AgentId id) const {
  auto it = std::lower_bound(agents.begin(), agents.end(), id,
                             [](const Agent& a, AgentId key) { return a.id < key; });
  return it != agents.end() && it->id == id ? &*it : nullptr;
}

Agent* WorldState::find(AgentId id) {
  return const_cast<Agent*>(std::as_const(*this).find(id));
}

WorldState make_world(Scene scene, std::uint64_t seed) {
  validate_scene(scene);
  WorldState w;
  w.scene = std::make_shared<const Scene>(std::move(scene));
  w.rng = Rng(seed);
  return w;
}

WorldState make_world(std::shared_ptr<const Scene> scene, std::uint64_t seed) {
  if (!scene) {
    throw std::invalid_argument("null scene");
  }
  validate_scene(*scene);
  WorldState w;
  w.scene = std::move(scene);
  w.rng = Rng(seed);
  return w;
}

AgentId add_agent(WorldState& world, Agent agent) {
  agent.id = world.next_id++;
  validate_agent(agent);
  // Fresh ids are monotone, so appending keeps the id order.
  world.agents.push_back(agent);
  return agent.id;
}

bool remove_agent(WorldState& world, AgentId id) {
  auto it = std::find_if(world.agents.begin(), world.agents.end(),
                         [id](const Agent& a) { return a.id == id; });
  if (it == world.agents.end()) {
    return false;
  }
  world.agents.erase(it);
  return true;
}

void step_world_in_place(WorldState& world, double dt, const VelocityCommands& commands) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("dt must be positive and finite");
  }
  for (const auto& [id, cmd] : commands) {
    const Agent* a = world.find(id);
    if (a == nullptr) {
      throw WorldError("velocity command for unknown agent id " + std::to_string(id));
    }
    if (!is_finite(cmd) || norm(cmd) > a->max_speed + kSpeedSlack) {
      throw std::invalid_argument("command for agent " + std::to_string(id) +
                                  " exceeds max_speed");
    }
  }

  for (Agent& a : world.agents) {
    auto it = commands.find(a.id);
    if (it != commands.end()) {
      Vec2 dv = it->second - a.velocity;
      const double limit = a.max_accel * dt;
      const double dv_norm = norm(dv);
      if (dv_norm > limit) {
        dv = dv * (limit / dv_norm);
      }
      a.velocity += dv;
    }
    a.position += a.velocity * dt;
    if (world.scene) {
      a.position = resolve_penetration(*world.scene, a.position, a.radius);
    }
  }
  ++world.tick;
  world.time = static_cast<double>(world.tick) * dt;
}

WorldState step_world(const WorldState& world, double dt, const VelocityCommands& commands) {
  WorldState next = world;
  step_world_in_place(next, dt, commands);
  return next;
}

}  // namespace dynsim
