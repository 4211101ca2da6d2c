// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <deque>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dynsim/bench/episode.hpp"
#include "dynsim/crowd/crowd.hpp"
#include "dynsim/service/protocol.hpp"
#include "dynsim/service/task.hpp"
#include "dynsim/sync/bridge.hpp"

namespace dynsim {

struct SessionConfig {
  std::shared_ptr<const Scene> scene;
  PedestrianConfig pedestrians;
  /// Without a robot, SetRobotGoal fails and tasks fail on start.
  std::optional<RobotConfig> robot;
  OrcaParams orca;
  double dt = 0.1;
  std::uint64_t seed = 0;
  std::map<std::string, Vec2> task_targets;
  /// Robot distance to a task target that counts as Completed.
  double task_tolerance = 0.3;
};

void validate_session_config(const SessionConfig& cfg);

nlohmann::json session_config_to_json(const SessionConfig& cfg);
SessionConfig session_config_from_json(const nlohmann::json& j);

/// 0 is reserved for commands submitted locally.
using ClientId = std::uint64_t;

struct Outgoing {
  ClientId client = 0;
  Response response;
};

/// One applied input, stamped with the tick it was applied before.
struct TranscriptEntry {
  std::uint64_t tick = 0;
  std::optional<Command> command;
  /// Pose override: agent id and planar position.
  std::optional<std::pair<AgentId, Vec2>> pose;

  bool operator==(const TranscriptEntry&) const = default;
};

struct Transcript;
class Session;
std::unique_ptr<Session> replay_transcript(const Transcript& t);

/// A live world plus its control state. submit() and the pose sink are safe
/// from any thread. Everything else belongs to the thread that steps.
class Session {
 public:
  explicit Session(SessionConfig cfg);

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  void submit(Command cmd, ClientId client = 0);

  /// Sink for a StreamBridge. Object ids address agent ids; updates are
  /// queued and applied between ticks, setting the agent's planar position.
  PoseSink pose_sink();

  /// Applies every queued input in arrival order, then advances one tick
  /// unless paused.
  std::vector<Outgoing> step();

  /// Applies a command right away, bypassing the queue.
  Response apply(const Command& cmd);

  Snapshot snapshot() const;

  const WorldState& world() const { return world_; }
  const TaskBoard& tasks() const { return tasks_; }
  /// Current config; SetParam edits the ORCA part.
  const SessionConfig& config() const { return cfg_; }
  const SessionConfig& initial_config() const { return initial_cfg_; }
  bool paused() const { return paused_; }
  std::uint64_t version() const { return version_; }
  std::optional<Vec2> robot_goal() const { return robot_goal_; }
  /// Robot velocity command of the last tick.
  std::optional<Vec2> last_robot_command() const { return last_robot_command_; }
  const std::vector<TranscriptEntry>& transcript() const { return transcript_; }

 private:
  friend std::unique_ptr<Session> replay_transcript(const Transcript& t);
  using Clock = std::chrono::steady_clock;

  struct Queued {
    ClientId client = 0;
    Clock::time_point enqueued;
    std::uint64_t enqueued_tick = 0;
    std::optional<Command> command;
    std::optional<PoseUpdate> pose;
  };

  Response apply_at(const Command& cmd, std::uint64_t latency_us, std::uint64_t latency_ticks);
  nlohmann::json dispatch(const Command& cmd);
  void apply_pose(const PoseUpdate& update);
  void start_task(std::uint64_t id);
  void advance();

  SessionConfig cfg_;
  SessionConfig initial_cfg_;
  WorldState world_;
  std::optional<AgentId> robot_;
  std::optional<Vec2> robot_goal_;
  std::optional<Vec2> task_target_;
  std::optional<Vec2> last_robot_command_;
  RobotPolicy policy_;
  TaskBoard tasks_;
  TaskTargets targets_;
  bool paused_ = false;
  std::uint64_t version_ = 0;
  SnapshotStats stats_;
  std::vector<TranscriptEntry> transcript_;

  std::mutex queue_mutex_;
  std::deque<Queued> queue_;
  // World tick as seen by submitting threads.
  std::atomic<std::uint64_t> published_tick_{0};
};

// Transcript file: JSON lines. A header carrying the session config, one
// line per applied input, and a footer with the final tick.
void write_transcript(std::ostream& out, const Session& session);

struct Transcript {
  SessionConfig config;
  std::vector<TranscriptEntry> entries;
  std::uint64_t end_tick = 0;
};

Transcript read_transcript(std::istream& in);

/// Rebuilds a session by re-applying every entry at its recorded tick and
/// stepping to end_tick.
std::unique_ptr<Session> replay_transcript(const Transcript& t);

}  // namespace dynsim
