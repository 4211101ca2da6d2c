// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "dynsim/crowd/crowd.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "dynsim/crowd/neighbor_index.hpp"

namespace dynsim {
namespace {

void check_range(const Range& r, const char* name) {
  if (!(r.min > 0.0) || !(r.max >= r.min) || !std::isfinite(r.max)) {
    throw std::invalid_argument(std::string("pedestrian ") + name +
                                " range needs 0 < min <= max");
  }
}

std::optional<Vec2> sample_clear_goal(Rng& rng, const Scene& scene, double radius,
                                      std::size_t attempts) {
  for (std::size_t k = 0; k < attempts; ++k) {
    const Vec2 g = sample_in_regions(rng, scene.goal_regions, scene.bounds);
    if (distance_to_nearest_obstacle(scene, g) >= radius) {
      return g;
    }
  }
  return std::nullopt;
}

}  // namespace

void validate_pedestrian_config(const PedestrianConfig& cfg) {
  check_range(cfg.pref_speed, "pref_speed");
  check_range(cfg.radius, "radius");
  check_range(cfg.avoidance_radius, "avoidance_radius");
  check_range(cfg.max_accel, "max_accel");
  if (!(cfg.arrival_tolerance >= 0.0)) {
    throw std::invalid_argument("arrival_tolerance must be non-negative");
  }
  if (cfg.max_attempts == 0) {
    throw std::invalid_argument("max_attempts must be positive");
  }
}

Vec2 sample_in_regions(Rng& rng, const std::vector<Rect>& regions, const Rect& bounds) {
  const Rect* chosen = &bounds;
  if (!regions.empty()) {
    double total = 0.0;
    for (const Rect& r : regions) {
      total += r.area();
    }
    double pick = rng.uniform01() * total;
    chosen = &regions.back();
    for (const Rect& r : regions) {
      if (pick < r.area()) {
        chosen = &r;
        break;
      }
      pick -= r.area();
    }
  }
  const double x = rng.uniform(chosen->min.x, chosen->max.x);
  const double y = rng.uniform(chosen->min.y, chosen->max.y);
  return {x, y};
}

WorldState spawn_pedestrians(WorldState world, const PedestrianConfig& cfg) {
  validate_pedestrian_config(cfg);
  if (!world.scene) {
    throw std::invalid_argument("world has no scene");
  }
  const Scene& scene = *world.scene;
  world.crowd = {cfg.goal_resample, cfg.arrival_tolerance};

  for (std::size_t n = 0; n < cfg.count; ++n) {
    Agent a;
    a.kind = AgentKind::Pedestrian;
    a.radius = world.rng.uniform(cfg.radius.min, cfg.radius.max);
    a.pref_speed = world.rng.uniform(cfg.pref_speed.min, cfg.pref_speed.max);
    a.max_speed = a.pref_speed;
    a.avoidance_radius = world.rng.uniform(cfg.avoidance_radius.min, cfg.avoidance_radius.max);
    a.max_accel = world.rng.uniform(cfg.max_accel.min, cfg.max_accel.max);

    bool placed = false;
    for (std::size_t k = 0; k < cfg.max_attempts && !placed; ++k) {
      const Vec2 p = sample_in_regions(world.rng, scene.spawn_regions, scene.bounds);
      if (distance_to_nearest_obstacle(scene, p) < a.radius) {
        continue;
      }
      bool clear = true;
      for (const Agent& other : world.agents) {
        const double gap = a.radius + other.radius;
        if (abs_sq(other.position - p) < gap * gap) {
          clear = false;
          break;
        }
      }
      if (clear) {
        a.position = p;
        placed = true;
      }
    }
    if (!placed) {
      throw PlacementError("could not place pedestrian " + std::to_string(n) + " of " +
                           std::to_string(cfg.count) + " after " +
                           std::to_string(cfg.max_attempts) + " attempts");
    }
    auto goal = sample_clear_goal(world.rng, scene, a.radius, cfg.max_attempts);
    if (!goal) {
      throw PlacementError("could not find a clear goal for pedestrian " + std::to_string(n));
    }
    a.goal = *goal;
    add_agent(world, a);
  }
  return world;
}

Vec2 preferred_velocity(const Agent& agent, double arrival_tolerance) {
  const Vec2 to_goal = agent.goal - agent.position;
  const double dist = norm(to_goal);
  if (dist <= arrival_tolerance || dist == 0.0) {
    return {};
  }
  return to_goal * (agent.pref_speed / dist);
}

bool is_head_on(const Agent& a, const Vec2& pref_a, const Agent& b, const Vec2& pref_b) {
  const double na = norm(pref_a);
  const double nb = norm(pref_b);
  const Vec2 p = b.position - a.position;
  const double np = norm(p);
  if (na == 0.0 || nb == 0.0 || np == 0.0) {
    return false;
  }
  const Vec2 ua = pref_a / na;
  const Vec2 ub = pref_b / nb;
  const Vec2 up = p / np;
  return std::fabs(det(ua, ub)) <= kHeadOnTolerance && dot(ua, ub) < 0.0 &&
         std::fabs(det(up, ua)) <= kHeadOnTolerance && dot(up, ua) > 0.0;
}

VelocityCommands crowd_tick(WorldState& world, const OrcaParams& params, double dt) {
  validate_orca_params(params);
  VelocityCommands commands;
  if (!world.scene) {
    return commands;
  }
  const Scene& scene = *world.scene;
  const double tol = world.crowd.arrival_tolerance;

  if (world.crowd.goal_resample == GoalResample::OnArrival) {
    for (Agent& a : world.agents) {
      if (a.kind != AgentKind::Pedestrian || norm(a.goal - a.position) > tol) {
        continue;
      }
      if (auto g = sample_clear_goal(world.rng, scene, a.radius, 1000)) {
        a.goal = *g;
      }
    }
  }

  const std::size_t n = world.agents.size();
  std::vector<Vec2> prefs(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (world.agents[i].kind == AgentKind::Pedestrian) {
      prefs[i] = preferred_velocity(world.agents[i], tol);
    }
  }
  std::vector<Vec2> adjusted = prefs;
  for (std::size_t i = 0; i < n; ++i) {
    const Agent& a = world.agents[i];
    if (a.kind != AgentKind::Pedestrian) {
      continue;
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      const Agent& b = world.agents[j];
      if (b.kind == AgentKind::Pedestrian && is_head_on(a, prefs[i], b, prefs[j])) {
        adjusted[i] = rotated(prefs[i], kHeadOnTieBreak);
        break;
      }
    }
  }

  const NeighborIndex index(world.agents);
  for (std::size_t i = 0; i < n; ++i) {
    const Agent& a = world.agents[i];
    if (a.kind != AgentKind::Pedestrian) {
      continue;
    }
    const std::vector<const Agent*> neighbors = index.query(a, params);
    const OrcaConstraints c =
        orca_lines(a, std::span<const Agent* const>(neighbors), scene, params, dt);
    commands[a.id] = solve_velocity(c.lines, adjusted[i], a.max_speed, c.static_count);
  }
  return commands;
}

}  // namespace dynsim
