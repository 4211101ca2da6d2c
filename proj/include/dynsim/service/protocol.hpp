// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dynsim/service/task.hpp"
#include "dynsim/world/world.hpp"

namespace dynsim {

// Control channel: one JSON object per line.
//   client -> service  {"kind": "...", "payload": {...}, "client_tag": "..."}
//   service -> client  {"type": "ack" | "error" | "snapshot", ...}
// docs/protocol.md lists every payload.

enum class CommandKind {
  Pause,
  Resume,
  SetRobotGoal,
  SpawnPedestrians,
  RemoveAgent,
  SetParam,
  IssueTask,
  InterruptTask,
  Snapshot
};

const char* to_string(CommandKind k);
/// Throws ProtocolError on an unknown name.
CommandKind command_kind_from_string(std::string_view s);

struct Command {
  CommandKind kind = CommandKind::Snapshot;
  nlohmann::json payload = nlohmann::json::object();
  std::string client_tag;

  bool operator==(const Command&) const = default;
};

/// Envelope-level failure: bad JSON, missing or unknown kind. The server
/// drops the client after reporting it.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Payload problems are not checked here; they surface as error responses.
Command parse_command(std::string_view line);
std::string encode_command(const Command& cmd);

struct Response {
  bool ok = true;
  CommandKind kind = CommandKind::Snapshot;
  std::string client_tag;
  /// State version after the command.
  std::uint64_t version = 0;
  nlohmann::json result = nlohmann::json::object();
  std::string error;

  bool operator==(const Response&) const = default;
};

nlohmann::json to_json(const Response& r);
Response response_from_json(const nlohmann::json& j);

struct AgentView {
  AgentId id = 0;
  AgentKind kind = AgentKind::Pedestrian;
  Vec2 position;
  Vec2 velocity;
  double radius = 0.0;
  Vec2 goal;

  bool operator==(const AgentView&) const = default;
};

struct SnapshotStats {
  std::uint64_t commands_applied = 0;
  std::uint64_t commands_rejected = 0;
  /// Snapshots a slow client did not take; filled in by the server.
  std::uint64_t snapshots_dropped = 0;
  /// Queue-to-apply delay of the most recent and the slowest command.
  std::uint64_t last_command_latency_us = 0;
  std::uint64_t max_command_latency_us = 0;
  /// Ticks from queueing to the first tick that runs with the command; 1 means
  /// it took effect on the very next tick.
  std::uint64_t last_command_latency_ticks = 0;
  std::uint64_t max_command_latency_ticks = 0;
  std::uint64_t pose_updates_applied = 0;

  bool operator==(const SnapshotStats&) const = default;
};

struct Snapshot {
  std::uint64_t tick = 0;
  double time = 0.0;
  bool paused = false;
  std::uint64_t version = 0;
  std::optional<AgentId> robot;
  std::optional<Vec2> robot_goal;
  std::vector<AgentView> agents;
  std::vector<Task> tasks;
  SnapshotStats stats;

  bool operator==(const Snapshot&) const = default;
};

nlohmann::json to_json(const Snapshot& s);
Snapshot snapshot_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Task& t);
Task task_from_json(const nlohmann::json& j);

/// [x, y] with finite numbers. Throws std::invalid_argument otherwise.
Vec2 vec2_from_json(const nlohmann::json& j, const char* what);

}  // namespace dynsim
