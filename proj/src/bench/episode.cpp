// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "dynsim/bench/episode.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>

namespace dynsim {
namespace {

constexpr AgentId kRobotId = 0;

void require(bool ok, const char* what) {
  if (!ok) {
    throw std::invalid_argument(what);
  }
}

}  // namespace

void validate_episode_config(const EpisodeConfig& cfg) {
  require(cfg.scene != nullptr, "episode has no scene");
  require(cfg.dt > 0.0 && std::isfinite(cfg.dt), "dt must be positive");
  require(cfg.timeout > 0.0 && std::isfinite(cfg.timeout), "timeout must be positive");
  require(cfg.success_tolerance >= 0.0, "success_tolerance must be non-negative");
  const RobotConfig& r = cfg.robot;
  require(r.radius > 0.0, "robot radius must be positive");
  require(r.max_speed > 0.0, "robot max_speed must be positive");
  require(r.max_accel > 0.0, "robot max_accel must be positive");
  require(cfg.scene->bounds.contains(r.start) &&
              distance_to_nearest_obstacle(*cfg.scene, r.start) >= r.radius,
          "robot start is not in free space");
  require(cfg.scene->bounds.contains(r.goal) &&
              distance_to_nearest_obstacle(*cfg.scene, r.goal) >= r.radius,
          "robot goal is not in free space");
  validate_pedestrian_config(cfg.pedestrians);
  validate_orca_params(cfg.orca);
}

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Success:
      return "success";
    case Outcome::Collision:
      return "collision";
    case Outcome::Timeout:
      return "timeout";
    case Outcome::Aborted:
      return "aborted";
  }
  return "unknown";
}

Outcome outcome_from_string(const std::string& s) {
  for (Outcome o : {Outcome::Success, Outcome::Collision, Outcome::Timeout, Outcome::Aborted}) {
    if (s == to_string(o)) {
      return o;
    }
  }
  throw std::invalid_argument("unknown outcome '" + s + "'");
}

RobotPolicy orca_robot_policy(const OrcaParams& params, double dt) {
  validate_orca_params(params);
  return [params, dt](const WorldState& world, AgentId id, const Vec2& goal) {
    const Agent* robot = world.find(id);
    if (robot == nullptr) {
      throw std::invalid_argument("robot not in world");
    }
    const Vec2 to_goal = goal - robot->position;
    const double dist = norm(to_goal);
    Vec2 pref;
    if (dist > 0.0) {
      pref = to_goal * (std::min(robot->pref_speed, dist / dt) / dist);
    }
    const std::vector<const Agent*> neighbors = select_neighbors(*robot, world.agents, params);
    const OrcaConstraints c = orca_lines(*robot, std::span<const Agent* const>(neighbors),
                                         *world.scene, params, dt);
    return solve_velocity(c.lines, pref, robot->max_speed, c.static_count);
  };
}

WorldState make_episode_world(const EpisodeConfig& cfg) {
  validate_episode_config(cfg);
  WorldState world = make_world(cfg.scene, cfg.seed);

  Agent robot;
  robot.kind = AgentKind::Robot;
  robot.position = cfg.robot.start;
  robot.goal = cfg.robot.goal;
  robot.radius = cfg.robot.radius;
  robot.pref_speed = cfg.robot.max_speed;
  robot.max_speed = cfg.robot.max_speed;
  robot.max_accel = cfg.robot.max_accel;
  robot.avoidance_radius = cfg.robot.avoidance_radius;
  add_agent(world, robot);

  for (const ScriptedPedestrian& s : cfg.scripted) {
    Agent p;
    p.kind = AgentKind::Pedestrian;
    p.position = s.position;
    p.goal = s.goal;
    p.radius = s.radius;
    p.pref_speed = s.pref_speed;
    p.max_speed = s.pref_speed;
    p.max_accel = s.max_accel;
    p.avoidance_radius = cfg.pedestrians.avoidance_radius.max;
    add_agent(world, p);
  }
  return spawn_pedestrians(std::move(world), cfg.pedestrians);
}

EpisodeResult run_episode(const EpisodeConfig& cfg, const RobotPolicy& policy) {
  WorldState world = make_episode_world(cfg);
  EpisodeResult result;
  result.seed = cfg.seed;
  result.min_human_distance = std::numeric_limits<double>::infinity();

  while (true) {
    const Agent& robot = world.agents.front();
    bool collided = false;
    for (const Agent& a : world.agents) {
      if (a.kind != AgentKind::Pedestrian) {
        continue;
      }
      const double d = norm(a.position - robot.position);
      result.min_human_distance = std::min(result.min_human_distance, d);
      collided = collided || d < a.radius + robot.radius;
    }
    result.ticks = world.tick;
    if (collided) {
      result.outcome = Outcome::Collision;
      return result;
    }
    if (norm(cfg.robot.goal - robot.position) <= cfg.success_tolerance) {
      result.outcome = Outcome::Success;
      result.nav_time = world.time;
      return result;
    }
    if (world.time >= cfg.timeout - 1e-9) {
      result.outcome = Outcome::Timeout;
      return result;
    }

    const Vec2 before = robot.position;
    try {
      const Vec2 cmd = policy(world, kRobotId, cfg.robot.goal);
      VelocityCommands commands = crowd_tick(world, cfg.orca, cfg.dt);
      commands[kRobotId] = cmd;
      step_world_in_place(world, cfg.dt, commands);
    } catch (const std::exception& e) {
      result.outcome = Outcome::Aborted;
      result.error = e.what();
      return result;
    }
    result.path_length += norm(world.agents.front().position - before);
  }
}

BenchMetrics aggregate(std::span<const EpisodeResult> results) {
  BenchMetrics m;
  std::size_t success = 0;
  std::size_t collision = 0;
  std::size_t timeout = 0;
  double nav_sum = 0.0;
  for (const EpisodeResult& r : results) {
    switch (r.outcome) {
      case Outcome::Success:
        ++success;
        nav_sum += r.nav_time.value_or(0.0);
        break;
      case Outcome::Collision:
        ++collision;
        break;
      case Outcome::Timeout:
        ++timeout;
        break;
      case Outcome::Aborted:
        ++m.aborted;
        break;
    }
  }
  m.episodes = success + collision + timeout;
  if (m.episodes == 0) {
    throw std::invalid_argument("no completed episodes to aggregate");
  }
  const double n = static_cast<double>(m.episodes);
  m.success_rate = static_cast<double>(success) / n;
  m.collision_rate = static_cast<double>(collision) / n;
  m.timeout_rate = static_cast<double>(timeout) / n;
  if (success > 0) {
    m.avg_nav_time = nav_sum / static_cast<double>(success);
  }
  return m;
}

}  // namespace dynsim
