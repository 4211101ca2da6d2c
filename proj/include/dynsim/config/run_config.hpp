// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dynsim/bench/suite.hpp"
#include "dynsim/service/server.hpp"
#include "dynsim/service/session.hpp"
#include "dynsim/sync/calibration.hpp"
#include "dynsim/traj/bezier.hpp"

namespace dynsim {

/// Bad, missing or inconsistent configuration. The CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BenchSection {
  std::vector<std::size_t> human_counts{10, 15, 20};
  std::size_t episodes_per_cell = 100;
  unsigned threads = 1;
};

struct SmoothingSection {
  double tension = kDefaultTension;
  SampleOptions sample;
  /// Camera waypoints for `export`; may be empty.
  std::vector<Vec2> waypoints;
};

struct SimulateSection {
  /// Recorded frames = round(duration / dt).
  double duration = 10.0;
  std::size_t record_stride = 1;
};

struct PoseSourceSection {
  /// Exactly one of these is set.
  std::optional<std::filesystem::path> replay;
  std::optional<std::string> connect;  // host:port
  std::optional<std::filesystem::path> calibration;
  double replay_period_s = 0.01;
};

struct ServeSection {
  ServerOptions server{7400};
  std::map<std::string, Vec2> task_targets;
  double task_tolerance = 0.3;
  std::optional<PoseSourceSection> pose_source;
};

/// One document shared by all subcommands. Relative paths resolve against
/// the config file's directory.
struct RunConfig {
  std::filesystem::path scene_path;
  std::shared_ptr<const Scene> scene;
  std::uint64_t seed = 0;
  double dt = 0.1;
  PedestrianConfig pedestrians;
  OrcaParams orca;
  std::optional<RobotConfig> robot;
  double timeout = 60.0;
  double success_tolerance = 0.3;
  BenchSection bench;
  SmoothingSection smoothing;
  SimulateSection simulate;
  ServeSection serve;
  std::filesystem::path output = "out";
};

/// Throws ConfigError naming the file or field at fault.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
/// Round-trips through parse_run_config (paths written absolute).
nlohmann::json run_config_to_json(const RunConfig& cfg);

EpisodeConfig episode_template(const RunConfig& cfg);
SuiteConfig suite_config(const RunConfig& cfg);
SessionConfig session_config(const RunConfig& cfg);

// Calibration files.
//
// Pairs: one correspondence per line, "rx ry rz vx vy vz", whitespace
// separated; blank lines and lines starting with '#' are skipped.
// Transform: JSON {"rotation": 3x3 rows, "translation": [x,y,z],
// "quaternion": [w,x,y,z], "residual_rms": m, "pairs": n}.
std::vector<Correspondence> read_correspondences(const std::filesystem::path& path);
void write_calibration(const std::filesystem::path& path, const Calibration& c,
                       std::size_t pairs);
Calibration read_calibration(const std::filesystem::path& path);

}  // namespace dynsim
