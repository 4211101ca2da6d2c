// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "dynsim/service/protocol.hpp"

#include <cmath>

namespace dynsim {
namespace {

using nlohmann::json;

constexpr CommandKind kAllKinds[] = {
    CommandKind::Pause,     CommandKind::Resume,        CommandKind::SetRobotGoal,
    CommandKind::SpawnPedestrians, CommandKind::RemoveAgent, CommandKind::SetParam,
    CommandKind::IssueTask, CommandKind::InterruptTask, CommandKind::Snapshot};

json vec_json(const Vec2& v) { return json::array({v.x, v.y}); }

TaskStatus task_status_from_string(const std::string& s) {
  for (TaskStatus t : {TaskStatus::Pending, TaskStatus::Executing, TaskStatus::Interrupted,
                       TaskStatus::Completed, TaskStatus::Failed}) {
    if (s == to_string(t)) {
      return t;
    }
  }
  throw std::invalid_argument("unknown task status '" + s + "'");
}

}  // namespace

const char* to_string(CommandKind k) {
  switch (k) {
    case CommandKind::Pause:
      return "pause";
    case CommandKind::Resume:
      return "resume";
    case CommandKind::SetRobotGoal:
      return "set_robot_goal";
    case CommandKind::SpawnPedestrians:
      return "spawn_pedestrians";
    case CommandKind::RemoveAgent:
      return "remove_agent";
    case CommandKind::SetParam:
      return "set_param";
    case CommandKind::IssueTask:
      return "issue_task";
    case CommandKind::InterruptTask:
      return "interrupt_task";
    case CommandKind::Snapshot:
      return "snapshot";
  }
  return "unknown";
}

CommandKind command_kind_from_string(std::string_view s) {
  for (CommandKind k : kAllKinds) {
    if (s == to_string(k)) {
      return k;
    }
  }
  throw ProtocolError("unknown command kind '" + std::string(s) + "'");
}

Command parse_command(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) {
    throw ProtocolError("command must be a JSON object");
  }
  for (const auto& item : j.items()) {
    if (item.key() != "kind" && item.key() != "payload" && item.key() != "client_tag") {
      throw ProtocolError("unknown command field '" + item.key() + "'");
    }
  }
  if (!j.contains("kind") || !j["kind"].is_string()) {
    throw ProtocolError("command needs a string 'kind'");
  }
  Command cmd;
  cmd.kind = command_kind_from_string(j["kind"].get<std::string>());
  if (j.contains("payload")) {
    if (!j["payload"].is_object()) {
      throw ProtocolError("'payload' must be an object");
    }
    cmd.payload = j["payload"];
  }
  if (j.contains("client_tag")) {
    if (!j["client_tag"].is_string()) {
      throw ProtocolError("'client_tag' must be a string");
    }
    cmd.client_tag = j["client_tag"].get<std::string>();
  }
  return cmd;
}

std::string encode_command(const Command& cmd) {
  return json{{"kind", to_string(cmd.kind)}, {"payload", cmd.payload}, {"client_tag", cmd.client_tag}}
      .dump();
}

json to_json(const Response& r) {
  json j{{"type", r.ok ? "ack" : "error"},
         {"kind", to_string(r.kind)},
         {"client_tag", r.client_tag},
         {"version", r.version}};
  if (r.ok) {
    j["result"] = r.result;
  } else {
    j["message"] = r.error;
  }
  return j;
}

Response response_from_json(const json& j) {
  Response r;
  const std::string type = j.at("type").get<std::string>();
  if (type != "ack" && type != "error") {
    throw std::invalid_argument("not a response: '" + type + "'");
  }
  r.ok = type == "ack";
  r.kind = command_kind_from_string(j.at("kind").get<std::string>());
  r.client_tag = j.at("client_tag").get<std::string>();
  r.version = j.at("version").get<std::uint64_t>();
  if (r.ok) {
    r.result = j.at("result");
  } else {
    r.error = j.at("message").get<std::string>();
  }
  return r;
}

json to_json(const Task& t) {
  json j{{"id", t.id},
         {"prompt", t.prompt},
         {"status", to_string(t.status)},
         {"issued_at", t.issued_at},
         {"ended_at", t.ended_at ? json(*t.ended_at) : json(nullptr)}};
  if (!t.reason.empty()) {
    j["reason"] = t.reason;
  }
  return j;
}

Task task_from_json(const json& j) {
  Task t;
  t.id = j.at("id").get<std::uint64_t>();
  t.prompt = j.at("prompt").get<std::string>();
  t.status = task_status_from_string(j.at("status").get<std::string>());
  t.issued_at = j.at("issued_at").get<double>();
  if (!j.at("ended_at").is_null()) {
    t.ended_at = j["ended_at"].get<double>();
  }
  t.reason = j.value("reason", "");
  return t;
}

json to_json(const Snapshot& s) {
  json agents = json::array();
  for (const AgentView& a : s.agents) {
    agents.push_back({{"id", a.id},
                      {"kind", a.kind == AgentKind::Robot ? "robot" : "pedestrian"},
                      {"position", vec_json(a.position)},
                      {"velocity", vec_json(a.velocity)},
                      {"radius", a.radius},
                      {"goal", vec_json(a.goal)}});
  }
  json tasks = json::array();
  for (const Task& t : s.tasks) {
    tasks.push_back(to_json(t));
  }
  return {{"type", "snapshot"},
          {"tick", s.tick},
          {"time", s.time},
          {"paused", s.paused},
          {"version", s.version},
          {"robot", s.robot ? json(*s.robot) : json(nullptr)},
          {"robot_goal", s.robot_goal ? vec_json(*s.robot_goal) : json(nullptr)},
          {"agents", agents},
          {"tasks", tasks},
          {"stats",
           {{"commands_applied", s.stats.commands_applied},
            {"commands_rejected", s.stats.commands_rejected},
            {"snapshots_dropped", s.stats.snapshots_dropped},
            {"last_command_latency_us", s.stats.last_command_latency_us},
            {"max_command_latency_us", s.stats.max_command_latency_us},
            {"last_command_latency_ticks", s.stats.last_command_latency_ticks},
            {"max_command_latency_ticks", s.stats.max_command_latency_ticks},
            {"pose_updates_applied", s.stats.pose_updates_applied}}}};
}

Snapshot snapshot_from_json(const json& j) {
  if (j.at("type") != "snapshot") {
    throw std::invalid_argument("not a snapshot");
  }
  Snapshot s;
  s.tick = j.at("tick").get<std::uint64_t>();
  s.time = j.at("time").get<double>();
  s.paused = j.at("paused").get<bool>();
  s.version = j.at("version").get<std::uint64_t>();
  if (!j.at("robot").is_null()) {
    s.robot = j["robot"].get<AgentId>();
  }
  if (!j.at("robot_goal").is_null()) {
    s.robot_goal = vec2_from_json(j["robot_goal"], "robot_goal");
  }
  for (const json& a : j.at("agents")) {
    AgentView v;
    v.id = a.at("id").get<AgentId>();
    const std::string kind = a.at("kind").get<std::string>();
    if (kind != "robot" && kind != "pedestrian") {
      throw std::invalid_argument("unknown agent kind '" + kind + "'");
    }
    v.kind = kind == "robot" ? AgentKind::Robot : AgentKind::Pedestrian;
    v.position = vec2_from_json(a.at("position"), "position");
    v.velocity = vec2_from_json(a.at("velocity"), "velocity");
    v.radius = a.at("radius").get<double>();
    v.goal = vec2_from_json(a.at("goal"), "goal");
    s.agents.push_back(v);
  }
  for (const json& t : j.at("tasks")) {
    s.tasks.push_back(task_from_json(t));
  }
  const json& st = j.at("stats");
  s.stats.commands_applied = st.at("commands_applied").get<std::uint64_t>();
  s.stats.commands_rejected = st.at("commands_rejected").get<std::uint64_t>();
  s.stats.snapshots_dropped = st.at("snapshots_dropped").get<std::uint64_t>();
  s.stats.last_command_latency_us = st.at("last_command_latency_us").get<std::uint64_t>();
  s.stats.max_command_latency_us = st.at("max_command_latency_us").get<std::uint64_t>();
  s.stats.last_command_latency_ticks = st.at("last_command_latency_ticks").get<std::uint64_t>();
  s.stats.max_command_latency_ticks = st.at("max_command_latency_ticks").get<std::uint64_t>();
  s.stats.pose_updates_applied = st.at("pose_updates_applied").get<std::uint64_t>();
  return s;
}

Vec2 vec2_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw std::invalid_argument(std::string(what) + " must be [x, y]");
  }
  const Vec2 v{j[0].get<double>(), j[1].get<double>()};
  if (!std::isfinite(v.x) || !std::isfinite(v.y)) {
    throw std::invalid_argument(std::string(what) + " must be finite");
  }
  return v;
}

}  // namespace dynsim
