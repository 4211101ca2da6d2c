// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "dynsim/config/run_config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "dynsim/bench/config_json.hpp"

namespace dynsim {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json vec_json(const Vec2& v) { return json::array({v.x, v.y}); }

Vec2 vec_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError(where + " must be [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

fs::path resolve(const fs::path& base, const json& j, const std::string& where) {
  if (!j.is_string()) {
    throw ConfigError(where + " must be a path string");
  }
  const fs::path p = j.get<std::string>();
  return p.is_absolute() ? p : base / p;
}

template <typename T>
T get(const json& j, const char* key, const T& fallback, const std::string& where) {
  if (!j.contains(key)) {
    return fallback;
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

void keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) {
    throw ConfigError(std::string(where) + " must be an object");
  }
  try {
    check_keys(j, allowed, where);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

json read_json_file(const fs::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(std::string("cannot open ") + what + " " + path.string());
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace

RunConfig load_run_config(const fs::path& path) {
  const json j = read_json_file(path, "config file");
  return parse_run_config(j, path.parent_path());
}

RunConfig parse_run_config(const json& j, const fs::path& base_dir) {
  keys(j,
       {"format", "scene", "seed", "dt", "pedestrians", "orca", "robot", "timeout",
        "success_tolerance", "bench", "smoothing", "simulate", "serve", "output"},
       "config");
  if (j.contains("format") && j["format"] != "dynsim-run/1") {
    throw ConfigError("unsupported config format " + j["format"].dump());
  }
  RunConfig cfg;
  if (!j.contains("scene")) {
    throw ConfigError("config needs 'scene'");
  }
  cfg.scene_path = resolve(base_dir, j["scene"], "scene");
  if (!fs::exists(cfg.scene_path)) {
    throw ConfigError("scene file not found: " + cfg.scene_path.string());
  }
  try {
    cfg.scene = std::make_shared<const Scene>(load_scene(cfg.scene_path));
  } catch (const SceneError& e) {
    throw ConfigError(cfg.scene_path.string() + ": " + e.what());
  }
  if (!j.contains("seed") || !j["seed"].is_number_integer() || j["seed"].get<std::int64_t>() < 0) {
    throw ConfigError("config needs a non-negative integer 'seed'");
  }
  cfg.seed = j["seed"].get<std::uint64_t>();
  cfg.dt = get(j, "dt", cfg.dt, "config");
  cfg.timeout = get(j, "timeout", cfg.timeout, "config");
  cfg.success_tolerance = get(j, "success_tolerance", cfg.success_tolerance, "config");
  try {
    if (j.contains("pedestrians")) {
      cfg.pedestrians = j["pedestrians"].get<PedestrianConfig>();
    }
    if (j.contains("orca")) {
      cfg.orca = j["orca"].get<OrcaParams>();
    }
    if (j.contains("robot") && !j["robot"].is_null()) {
      cfg.robot = j["robot"].get<RobotConfig>();
    }
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }

  if (j.contains("bench")) {
    const json& b = j["bench"];
    keys(b, {"human_counts", "episodes_per_cell", "threads"}, "bench");
    cfg.bench.human_counts = get(b, "human_counts", cfg.bench.human_counts, "bench");
    cfg.bench.episodes_per_cell = get(b, "episodes_per_cell", cfg.bench.episodes_per_cell, "bench");
    cfg.bench.threads = get(b, "threads", cfg.bench.threads, "bench");
  }
  if (j.contains("smoothing")) {
    const json& s = j["smoothing"];
    keys(s, {"tension", "samples_per_segment", "frame_dt", "arc_length", "waypoints"}, "smoothing");
    cfg.smoothing.tension = get(s, "tension", cfg.smoothing.tension, "smoothing");
    cfg.smoothing.sample.n_per_segment =
        get(s, "samples_per_segment", cfg.smoothing.sample.n_per_segment, "smoothing");
    cfg.smoothing.sample.frame_dt = get(s, "frame_dt", cfg.smoothing.sample.frame_dt, "smoothing");
    cfg.smoothing.sample.arc_length = get(s, "arc_length", cfg.smoothing.sample.arc_length, "smoothing");
    if (s.contains("waypoints")) {
      for (const json& w : s["waypoints"]) {
        cfg.smoothing.waypoints.push_back(vec_from(w, "smoothing.waypoints[]"));
      }
    }
  }
  if (j.contains("simulate")) {
    const json& s = j["simulate"];
    keys(s, {"duration", "record_stride"}, "simulate");
    cfg.simulate.duration = get(s, "duration", cfg.simulate.duration, "simulate");
    cfg.simulate.record_stride = get(s, "record_stride", cfg.simulate.record_stride, "simulate");
  }
  if (j.contains("serve")) {
    const json& s = j["serve"];
    keys(s,
         {"port", "bind_any", "snapshot_hz", "realtime_factor", "max_pending_snapshots",
          "task_targets", "task_tolerance", "pose_source"},
         "serve");
    ServerOptions& o = cfg.serve.server;
    o.port = get(s, "port", o.port, "serve");
    o.bind_any = get(s, "bind_any", o.bind_any, "serve");
    o.snapshot_hz = get(s, "snapshot_hz", o.snapshot_hz, "serve");
    o.realtime_factor = get(s, "realtime_factor", o.realtime_factor, "serve");
    o.max_pending_snapshots = get(s, "max_pending_snapshots", o.max_pending_snapshots, "serve");
    cfg.serve.task_tolerance = get(s, "task_tolerance", cfg.serve.task_tolerance, "serve");
    if (s.contains("task_targets")) {
      if (!s["task_targets"].is_object()) {
        throw ConfigError("serve.task_targets must map prompts to [x, y]");
      }
      for (const auto& item : s["task_targets"].items()) {
        cfg.serve.task_targets[item.key()] =
            vec_from(item.value(), "serve.task_targets." + item.key());
      }
    }
    if (s.contains("pose_source") && !s["pose_source"].is_null()) {
      const json& p = s["pose_source"];
      keys(p, {"replay", "connect", "calibration", "replay_period_s"}, "serve.pose_source");
      PoseSourceSection src;
      if (p.contains("replay")) {
        src.replay = resolve(base_dir, p["replay"], "serve.pose_source.replay");
      }
      if (p.contains("connect")) {
        src.connect = get<std::string>(p, "connect", "", "serve.pose_source");
      }
      if (src.replay.has_value() == src.connect.has_value()) {
        throw ConfigError("serve.pose_source needs exactly one of 'replay' or 'connect'");
      }
      if (p.contains("calibration")) {
        src.calibration = resolve(base_dir, p["calibration"], "serve.pose_source.calibration");
      }
      src.replay_period_s = get(p, "replay_period_s", src.replay_period_s, "serve.pose_source");
      cfg.serve.pose_source = src;
    }
  }
  if (j.contains("output")) {
    cfg.output = resolve(base_dir, j["output"], "output");
  } else {
    cfg.output = base_dir / "out";
  }

  // Cross-field checks reuse the module validators.
  try {
    validate_pedestrian_config(cfg.pedestrians);
    validate_orca_params(cfg.orca);
    validate_server_options(cfg.serve.server);
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) {
      throw std::invalid_argument("dt must be positive");
    }
    if (!(cfg.simulate.duration >= 0.0) || cfg.simulate.record_stride == 0) {
      throw std::invalid_argument("simulate needs duration >= 0 and record_stride >= 1");
    }
    if (!(cfg.smoothing.tension > 0.0 && cfg.smoothing.tension < 1.0)) {
      throw std::invalid_argument("smoothing.tension must lie in (0, 1)");
    }
    if (cfg.smoothing.sample.n_per_segment < 2 || !(cfg.smoothing.sample.frame_dt > 0.0)) {
      throw std::invalid_argument("smoothing needs samples_per_segment >= 2 and frame_dt > 0");
    }
    if (cfg.bench.episodes_per_cell == 0) {
      throw std::invalid_argument("bench.episodes_per_cell must be at least 1");
    }
    if (cfg.robot) {
      validate_episode_config(episode_template(cfg));
    }
    validate_session_config(session_config(cfg));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

json run_config_to_json(const RunConfig& cfg) {
  json targets = json::object();
  for (const auto& [k, v] : cfg.serve.task_targets) {
    targets[k] = vec_json(v);
  }
  json waypoints = json::array();
  for (const Vec2& w : cfg.smoothing.waypoints) {
    waypoints.push_back(vec_json(w));
  }
  const ServerOptions& o = cfg.serve.server;
  json serve{{"port", o.port},
             {"bind_any", o.bind_any},
             {"snapshot_hz", o.snapshot_hz},
             {"realtime_factor", o.realtime_factor},
             {"max_pending_snapshots", o.max_pending_snapshots},
             {"task_targets", targets},
             {"task_tolerance", cfg.serve.task_tolerance}};
  if (cfg.serve.pose_source) {
    const PoseSourceSection& p = *cfg.serve.pose_source;
    json src{{"replay_period_s", p.replay_period_s}};
    if (p.replay) {
      src["replay"] = fs::absolute(*p.replay).string();
    }
    if (p.connect) {
      src["connect"] = *p.connect;
    }
    if (p.calibration) {
      src["calibration"] = fs::absolute(*p.calibration).string();
    }
    serve["pose_source"] = src;
  }
  return {{"format", "dynsim-run/1"},
          {"scene", fs::absolute(cfg.scene_path).string()},
          {"seed", cfg.seed},
          {"dt", cfg.dt},
          {"pedestrians", cfg.pedestrians},
          {"orca", cfg.orca},
          {"robot", cfg.robot ? json(*cfg.robot) : json(nullptr)},
          {"timeout", cfg.timeout},
          {"success_tolerance", cfg.success_tolerance},
          {"bench",
           {{"human_counts", cfg.bench.human_counts},
            {"episodes_per_cell", cfg.bench.episodes_per_cell},
            {"threads", cfg.bench.threads}}},
          {"smoothing",
           {{"tension", cfg.smoothing.tension},
            {"samples_per_segment", cfg.smoothing.sample.n_per_segment},
            {"frame_dt", cfg.smoothing.sample.frame_dt},
            {"arc_length", cfg.smoothing.sample.arc_length},
            {"waypoints", waypoints}}},
          {"simulate",
           {{"duration", cfg.simulate.duration}, {"record_stride", cfg.simulate.record_stride}}},
          {"serve", serve},
          {"output", fs::absolute(cfg.output).string()}};
}

EpisodeConfig episode_template(const RunConfig& cfg) {
  if (!cfg.robot) {
    throw ConfigError("config needs a 'robot' section");
  }
  EpisodeConfig e;
  e.scene = cfg.scene;
  e.pedestrians = cfg.pedestrians;
  e.robot = *cfg.robot;
  e.orca = cfg.orca;
  e.dt = cfg.dt;
  e.timeout = cfg.timeout;
  e.success_tolerance = cfg.success_tolerance;
  e.seed = cfg.seed;
  return e;
}

SuiteConfig suite_config(const RunConfig& cfg) {
  SuiteConfig s;
  s.base = episode_template(cfg);
  s.human_counts = cfg.bench.human_counts;
  s.episodes_per_cell = cfg.bench.episodes_per_cell;
  s.base_seed = cfg.seed;
  s.threads = cfg.bench.threads;
  return s;
}

SessionConfig session_config(const RunConfig& cfg) {
  SessionConfig s;
  s.scene = cfg.scene;
  s.pedestrians = cfg.pedestrians;
  s.robot = cfg.robot;
  s.orca = cfg.orca;
  s.dt = cfg.dt;
  s.seed = cfg.seed;
  s.task_targets = cfg.serve.task_targets;
  s.task_tolerance = cfg.serve.task_tolerance;
  return s;
}

std::vector<Correspondence> read_correspondences(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open pairs file " + path.string());
  }
  std::vector<Correspondence> pairs;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') {
      continue;
    }
    std::istringstream fields(line);
    double v[6];
    for (double& x : v) {
      if (!(fields >> x)) {
        throw ConfigError(path.string() + ":" + std::to_string(n) + ": expected 6 numbers");
      }
    }
    std::string extra;
    if (fields >> extra) {
      throw ConfigError(path.string() + ":" + std::to_string(n) + ": expected 6 numbers");
    }
    pairs.push_back({{v[0], v[1], v[2]}, {v[3], v[4], v[5]}});
  }
  return pairs;
}

void write_calibration(const fs::path& path, const Calibration& c, std::size_t pairs) {
  const Mat3& r = c.transform.rotation;
  const Quat q = quat_from_matrix(r);
  const json j{{"rotation",
                {{r(0, 0), r(0, 1), r(0, 2)}, {r(1, 0), r(1, 1), r(1, 2)}, {r(2, 0), r(2, 1), r(2, 2)}}},
               {"translation",
                {c.transform.translation.x, c.transform.translation.y, c.transform.translation.z}},
               {"quaternion", {q.w, q.x, q.y, q.z}},
               {"residual_rms", c.residual_rms},
               {"pairs", pairs}};
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << j.dump(2) << '\n';
}

Calibration read_calibration(const fs::path& path) {
  const json j = read_json_file(path, "calibration file");
  Calibration c;
  try {
    const json& r = j.at("rotation");
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) {
        c.transform.rotation(row, col) = r.at(row).at(col).get<double>();
      }
    }
    const json& t = j.at("translation");
    c.transform.translation = {t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>()};
    c.residual_rms = j.value("residual_rms", 0.0);
    validate_transform(c.transform);
  } catch (const std::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return c;
}

}  // namespace dynsim
