// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "dynsim/bench/config_json.hpp"

#include <cmath>
#include <cstdio>
#include <memory>
#include <limits>
#include <stdexcept>
#include <string>

using nlohmann::json;

namespace dynsim {
namespace {

Vec2 vec_from(const json& j, const char* where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw std::invalid_argument(std::string(where) + " must be [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

json vec_to(const Vec2& v) { return json::array({v.x, v.y}); }

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) {
    try {
      out = j.at(key).get<T>();
    } catch (const json::exception& e) {
      throw std::invalid_argument(std::string("bad value for '") + key + "': " + e.what());
    }
  }
}

void read_vec(const json& j, const char* key, Vec2& out) {
  if (j.contains(key)) {
    out = vec_from(j.at(key), key);
  }
}

const char* resample_name(GoalResample g) {
  return g == GoalResample::OnArrival ? "on_arrival" : "never";
}

}  // namespace

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) {
    throw std::invalid_argument(std::string(where) + " must be an object");
  }
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) {
      ok = ok || key == a;
    }
    if (!ok) {
      throw std::invalid_argument("unknown key '" + key + "' in " + where);
    }
  }
}

void to_json(json& j, const Range& r) { j = json::array({r.min, r.max}); }

void from_json(const json& j, Range& r) {
  const Vec2 v = vec_from(j, "range");
  r = {v.x, v.y};
}

void to_json(json& j, const PedestrianConfig& c) {
  j = json{{"count", c.count},
           {"pref_speed", c.pref_speed},
           {"radius", c.radius},
           {"avoidance_radius", c.avoidance_radius},
           {"max_accel", c.max_accel},
           {"goal_resample", resample_name(c.goal_resample)},
           {"arrival_tolerance", c.arrival_tolerance},
           {"max_attempts", c.max_attempts}};
}

void from_json(const json& j, PedestrianConfig& c) {
  check_keys(j,
             {"count", "pref_speed", "radius", "avoidance_radius", "max_accel", "goal_resample",
              "arrival_tolerance", "max_attempts"},
             "pedestrians");
  read_opt(j, "count", c.count);
  read_opt(j, "pref_speed", c.pref_speed);
  read_opt(j, "radius", c.radius);
  read_opt(j, "avoidance_radius", c.avoidance_radius);
  read_opt(j, "max_accel", c.max_accel);
  read_opt(j, "arrival_tolerance", c.arrival_tolerance);
  read_opt(j, "max_attempts", c.max_attempts);
  if (j.contains("goal_resample")) {
    const std::string g = j.at("goal_resample").get<std::string>();
    if (g == "on_arrival") {
      c.goal_resample = GoalResample::OnArrival;
    } else if (g == "never") {
      c.goal_resample = GoalResample::Never;
    } else {
      throw std::invalid_argument("goal_resample must be 'on_arrival' or 'never'");
    }
  }
}

void to_json(json& j, const OrcaParams& p) {
  j = json{{"time_horizon_agents", p.time_horizon_agents},
           {"time_horizon_obstacles", p.time_horizon_obstacles},
           {"neighbor_limit", p.neighbor_limit},
           {"reciprocity", p.reciprocity}};
}

void from_json(const json& j, OrcaParams& p) {
  check_keys(j, {"time_horizon_agents", "time_horizon_obstacles", "neighbor_limit", "reciprocity"},
             "orca");
  read_opt(j, "time_horizon_agents", p.time_horizon_agents);
  read_opt(j, "time_horizon_obstacles", p.time_horizon_obstacles);
  read_opt(j, "neighbor_limit", p.neighbor_limit);
  read_opt(j, "reciprocity", p.reciprocity);
}

void to_json(json& j, const RobotConfig& r) {
  j = json{{"start", vec_to(r.start)},         {"goal", vec_to(r.goal)},
           {"radius", r.radius},               {"max_speed", r.max_speed},
           {"max_accel", r.max_accel},         {"avoidance_radius", r.avoidance_radius}};
}

void from_json(const json& j, RobotConfig& r) {
  check_keys(j, {"start", "goal", "radius", "max_speed", "max_accel", "avoidance_radius"},
             "robot");
  read_vec(j, "start", r.start);
  read_vec(j, "goal", r.goal);
  read_opt(j, "radius", r.radius);
  read_opt(j, "max_speed", r.max_speed);
  read_opt(j, "max_accel", r.max_accel);
  read_opt(j, "avoidance_radius", r.avoidance_radius);
}

void to_json(json& j, const ScriptedPedestrian& s) {
  j = json{{"position", vec_to(s.position)}, {"goal", vec_to(s.goal)},
           {"radius", s.radius},             {"pref_speed", s.pref_speed},
           {"max_accel", s.max_accel}};
}

void from_json(const json& j, ScriptedPedestrian& s) {
  check_keys(j, {"position", "goal", "radius", "pref_speed", "max_accel"}, "scripted pedestrian");
  read_vec(j, "position", s.position);
  s.goal = s.position;
  read_vec(j, "goal", s.goal);
  read_opt(j, "radius", s.radius);
  read_opt(j, "pref_speed", s.pref_speed);
  read_opt(j, "max_accel", s.max_accel);
}

void to_json(json& j, const EpisodeResult& r) {
  j = json{{"outcome", to_string(r.outcome)},
           {"nav_time", r.nav_time ? json(*r.nav_time) : json(nullptr)},
           {"min_human_distance", std::isfinite(r.min_human_distance)
                                      ? json(r.min_human_distance)
                                      : json(nullptr)},
           {"path_length", r.path_length},
           {"ticks", r.ticks},
           {"seed", r.seed}};
  if (!r.error.empty()) {
    j["error"] = r.error;
  }
}

void from_json(const json& j, EpisodeResult& r) {
  r.outcome = outcome_from_string(j.at("outcome").get<std::string>());
  r.nav_time.reset();
  if (!j.at("nav_time").is_null()) {
    r.nav_time = j.at("nav_time").get<double>();
  }
  r.min_human_distance = j.at("min_human_distance").is_null()
                             ? std::numeric_limits<double>::infinity()
                             : j.at("min_human_distance").get<double>();
  r.path_length = j.at("path_length").get<double>();
  r.ticks = j.at("ticks").get<std::uint64_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.error = j.value("error", std::string());
}

void to_json(json& j, const BenchMetrics& m) {
  j = json{{"episodes", m.episodes},
           {"aborted", m.aborted},
           {"success_rate", m.success_rate},
           {"collision_rate", m.collision_rate},
           {"timeout_rate", m.timeout_rate},
           {"avg_nav_time", m.avg_nav_time ? json(*m.avg_nav_time) : json(nullptr)}};
}

json episode_to_json(const EpisodeConfig& cfg) {
  json j{{"scene", json::parse(serialize_scene(*cfg.scene))},
         {"pedestrians", cfg.pedestrians},
         {"robot", cfg.robot},
         {"orca", cfg.orca},
         {"dt", cfg.dt},
         {"timeout", cfg.timeout},
         {"success_tolerance", cfg.success_tolerance},
         {"seed", cfg.seed}};
  if (!cfg.scripted.empty()) {
    j["scripted_pedestrians"] = cfg.scripted;
  }
  return j;
}

EpisodeConfig episode_from_json(const json& j) {
  check_keys(j,
             {"scene", "pedestrians", "robot", "orca", "dt", "timeout", "success_tolerance", "seed",
              "scripted_pedestrians"},
             "episode");
  EpisodeConfig cfg;
  if (!j.contains("scene")) {
    throw std::invalid_argument("episode needs a scene");
  }
  cfg.scene = std::make_shared<const Scene>(parse_scene(j.at("scene").dump()));
  read_opt(j, "pedestrians", cfg.pedestrians);
  read_opt(j, "robot", cfg.robot);
  read_opt(j, "orca", cfg.orca);
  read_opt(j, "dt", cfg.dt);
  read_opt(j, "timeout", cfg.timeout);
  read_opt(j, "success_tolerance", cfg.success_tolerance);
  read_opt(j, "seed", cfg.seed);
  read_opt(j, "scripted_pedestrians", cfg.scripted);
  return cfg;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace dynsim
