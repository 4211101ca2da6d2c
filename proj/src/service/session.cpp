// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "dynsim/service/session.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "dynsim/bench/config_json.hpp"

namespace dynsim {
namespace {

using nlohmann::json;

constexpr const char* kTranscriptFormat = "dynsim-transcript/1";

json vec_json(const Vec2& v) { return json::array({v.x, v.y}); }

// Payload errors surface to the client with the offending command.
class PayloadError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

const json& field(const json& payload, const char* key) {
  if (!payload.contains(key)) {
    throw PayloadError(std::string("payload needs '") + key + "'");
  }
  return payload.at(key);
}

double number_field(const json& payload, const char* key) {
  const json& v = field(payload, key);
  if (!v.is_number()) {
    throw PayloadError(std::string("'") + key + "' must be a number");
  }
  return v.get<double>();
}

void require_free(const Scene& scene, const Vec2& p, double radius, const char* what) {
  if (!scene.bounds.contains(p) || distance_to_nearest_obstacle(scene, p) < radius) {
    throw PayloadError(std::string(what) + " is not in free space");
  }
}

}  // namespace

void validate_session_config(const SessionConfig& cfg) {
  if (!cfg.scene) {
    throw std::invalid_argument("session has no scene");
  }
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) {
    throw std::invalid_argument("dt must be positive");
  }
  if (!(cfg.task_tolerance >= 0.0)) {
    throw std::invalid_argument("task_tolerance must be non-negative");
  }
  validate_pedestrian_config(cfg.pedestrians);
  validate_orca_params(cfg.orca);
  if (cfg.robot) {
    EpisodeConfig probe;
    probe.scene = cfg.scene;
    probe.robot = *cfg.robot;
    probe.dt = cfg.dt;
    validate_episode_config(probe);
  }
  for (const auto& [prompt, target] : cfg.task_targets) {
    if (!cfg.scene->bounds.contains(target)) {
      throw std::invalid_argument("task target for '" + prompt + "' is outside the scene");
    }
  }
}

json session_config_to_json(const SessionConfig& cfg) {
  json targets = json::object();
  for (const auto& [k, v] : cfg.task_targets) {
    targets[k] = vec_json(v);
  }
  return {{"scene", json::parse(serialize_scene(*cfg.scene))},
          {"pedestrians", cfg.pedestrians},
          {"robot", cfg.robot ? json(*cfg.robot) : json(nullptr)},
          {"orca", cfg.orca},
          {"dt", cfg.dt},
          {"seed", cfg.seed},
          {"task_targets", targets},
          {"task_tolerance", cfg.task_tolerance}};
}

SessionConfig session_config_from_json(const json& j) {
  check_keys(j, {"scene", "pedestrians", "robot", "orca", "dt", "seed", "task_targets", "task_tolerance"},
             "session");
  SessionConfig cfg;
  cfg.scene = std::make_shared<const Scene>(parse_scene(j.at("scene").dump()));
  if (j.contains("pedestrians")) {
    cfg.pedestrians = j["pedestrians"].get<PedestrianConfig>();
  }
  if (j.contains("robot") && !j["robot"].is_null()) {
    cfg.robot = j["robot"].get<RobotConfig>();
  }
  if (j.contains("orca")) {
    cfg.orca = j["orca"].get<OrcaParams>();
  }
  cfg.dt = j.value("dt", cfg.dt);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("task_targets")) {
    for (const auto& item : j["task_targets"].items()) {
      cfg.task_targets[item.key()] = vec2_from_json(item.value(), "task target");
    }
  }
  cfg.task_tolerance = j.value("task_tolerance", cfg.task_tolerance);
  validate_session_config(cfg);
  return cfg;
}

Session::Session(SessionConfig cfg)
    : cfg_(std::move(cfg)), initial_cfg_(cfg_), targets_(cfg_.task_targets) {
  validate_session_config(cfg_);
  world_ = make_world(cfg_.scene, cfg_.seed);
  if (cfg_.robot) {
    Agent robot;
    robot.kind = AgentKind::Robot;
    robot.position = cfg_.robot->start;
    robot.goal = cfg_.robot->goal;
    robot.radius = cfg_.robot->radius;
    robot.pref_speed = cfg_.robot->max_speed;
    robot.max_speed = cfg_.robot->max_speed;
    robot.max_accel = cfg_.robot->max_accel;
    robot.avoidance_radius = cfg_.robot->avoidance_radius;
    robot_ = add_agent(world_, robot);
    robot_goal_ = cfg_.robot->goal;
    policy_ = orca_robot_policy(cfg_.orca, cfg_.dt);
  }
  world_ = spawn_pedestrians(std::move(world_), cfg_.pedestrians);
}

void Session::submit(Command cmd, ClientId client) {
  std::lock_guard lock(queue_mutex_);
  queue_.push_back(
      {client, Clock::now(), published_tick_.load(), std::move(cmd), std::nullopt});
}

PoseSink Session::pose_sink() {
  return [this](const PoseUpdate& u) {
    std::lock_guard lock(queue_mutex_);
    queue_.push_back({0, Clock::now(), published_tick_.load(), std::nullopt, u});
  };
}

std::vector<Outgoing> Session::step() {
  std::deque<Queued> pending;
  {
    std::lock_guard lock(queue_mutex_);
    pending.swap(queue_);
  }
  std::vector<Outgoing> out;
  const Clock::time_point now = Clock::now();
  for (const Queued& q : pending) {
    if (q.command) {
      const auto latency =
          std::chrono::duration_cast<std::chrono::microseconds>(now - q.enqueued).count();
      const std::uint64_t ticks = world_.tick + 1 - q.enqueued_tick;
      out.push_back(
          {q.client, apply_at(*q.command, static_cast<std::uint64_t>(latency), ticks)});
    } else if (q.pose) {
      apply_pose(*q.pose);
    }
  }
  if (!paused_) {
    advance();
  }
  return out;
}

Response Session::apply(const Command& cmd) { return apply_at(cmd, 0, 0); }

Response Session::apply_at(const Command& cmd, std::uint64_t latency_us,
                           std::uint64_t latency_ticks) {
  transcript_.push_back({world_.tick, cmd, std::nullopt});
  stats_.last_command_latency_us = latency_us;
  stats_.max_command_latency_us = std::max(stats_.max_command_latency_us, latency_us);
  stats_.last_command_latency_ticks = latency_ticks;
  stats_.max_command_latency_ticks = std::max(stats_.max_command_latency_ticks, latency_ticks);
  Response r;
  r.kind = cmd.kind;
  r.client_tag = cmd.client_tag;
  try {
    r.result = dispatch(cmd);
    ++stats_.commands_applied;
  } catch (const std::exception& e) {
    r.ok = false;
    r.error = e.what();
    ++stats_.commands_rejected;
  }
  r.version = version_;
  return r;
}

json Session::dispatch(const Command& cmd) {
  const json& p = cmd.payload;
  switch (cmd.kind) {
    case CommandKind::Pause:
      if (!paused_) {
        paused_ = true;
        ++version_;
      }
      return {{"paused", true}};

    case CommandKind::Resume:
      if (paused_) {
        paused_ = false;
        ++version_;
      }
      return {{"paused", false}};

    case CommandKind::SetRobotGoal: {
      if (!robot_) {
        throw PayloadError("session has no robot");
      }
      const Vec2 goal = vec2_from_json(field(p, "goal"), "goal");
      require_free(*cfg_.scene, goal, cfg_.robot->radius, "goal");
      robot_goal_ = goal;
      world_.find(*robot_)->goal = goal;
      ++version_;
      return {{"goal", vec_json(goal)}};
    }

    case CommandKind::SpawnPedestrians: {
      const PedestrianConfig spawn = p.get<PedestrianConfig>();
      const CrowdSettings crowd = world_.crowd;
      const std::size_t before = world_.agents.size();
      WorldState next = spawn_pedestrians(world_, spawn);
      next.crowd = crowd;
      json ids = json::array();
      for (std::size_t i = before; i < next.agents.size(); ++i) {
        ids.push_back(next.agents[i].id);
      }
      world_ = std::move(next);
      ++version_;
      return {{"spawned", ids}};
    }

    case CommandKind::RemoveAgent: {
      const json& id_json = field(p, "id");
      if (!id_json.is_number_integer() || id_json.get<std::int64_t>() < 0) {
        throw PayloadError("'id' must be a non-negative integer");
      }
      const auto id = id_json.get<std::uint64_t>();
      if (id > std::numeric_limits<AgentId>::max() ||
          world_.find(static_cast<AgentId>(id)) == nullptr) {
        throw PayloadError("unknown agent id " + std::to_string(id));
      }
      if (robot_ && *robot_ == id) {
        throw PayloadError("agent " + std::to_string(id) + " is the robot");
      }
      remove_agent(world_, static_cast<AgentId>(id));
      ++version_;
      return {{"removed", id}};
    }

    case CommandKind::SetParam: {
      const json& name_json = field(p, "name");
      if (!name_json.is_string()) {
        throw PayloadError("'name' must be a string");
      }
      const std::string name = name_json.get<std::string>();
      OrcaParams orca = cfg_.orca;
      CrowdSettings crowd = world_.crowd;
      if (name == "crowd.goal_resample") {
        const std::string v = field(p, "value").is_string() ? p["value"].get<std::string>() : "";
        if (v == "on_arrival") {
          crowd.goal_resample = GoalResample::OnArrival;
        } else if (v == "never") {
          crowd.goal_resample = GoalResample::Never;
        } else {
          throw PayloadError("crowd.goal_resample must be \"on_arrival\" or \"never\"");
        }
        world_.crowd = crowd;
        ++version_;
        return {{"name", name}, {"value", v}};
      }
      const double v = number_field(p, "value");
      if (name == "orca.time_horizon_agents") {
        orca.time_horizon_agents = v;
      } else if (name == "orca.time_horizon_obstacles") {
        orca.time_horizon_obstacles = v;
      } else if (name == "orca.neighbor_limit") {
        if (v < 1.0 || v != std::floor(v)) {
          throw PayloadError("orca.neighbor_limit must be a positive integer");
        }
        orca.neighbor_limit = static_cast<std::size_t>(v);
      } else if (name == "orca.reciprocity") {
        orca.reciprocity = v;
      } else if (name == "crowd.arrival_tolerance") {
        if (!(v >= 0.0)) {
          throw PayloadError("crowd.arrival_tolerance must be non-negative");
        }
        crowd.arrival_tolerance = v;
      } else if (name == "pedestrian.pref_speed") {
        if (!(v > 0.0) || !std::isfinite(v)) {
          throw PayloadError("pedestrian.pref_speed must be positive");
        }
        for (Agent& a : world_.agents) {
          if (a.kind == AgentKind::Pedestrian) {
            a.pref_speed = v;
            a.max_speed = v;
          }
        }
      } else {
        throw PayloadError("unknown parameter '" + name + "'");
      }
      try {
        validate_orca_params(orca);
      } catch (const std::invalid_argument& e) {
        throw PayloadError(e.what());
      }
      if (!(orca == cfg_.orca)) {
        cfg_.orca = orca;
        if (robot_) {
          policy_ = orca_robot_policy(cfg_.orca, cfg_.dt);
        }
      }
      world_.crowd = crowd;
      ++version_;
      return {{"name", name}, {"value", v}};
    }

    case CommandKind::IssueTask: {
      const json& prompt = field(p, "prompt");
      if (!prompt.is_string()) {
        throw PayloadError("'prompt' must be a string");
      }
      const std::uint64_t id = tasks_.issue(prompt.get<std::string>(), world_.time);
      start_task(id);
      ++version_;
      return {{"task", to_json(*tasks_.find(id))}};
    }

    case CommandKind::InterruptTask: {
      std::optional<std::string> next;
      if (p.contains("prompt") && !p["prompt"].is_null()) {
        if (!p["prompt"].is_string()) {
          throw PayloadError("'prompt' must be a string");
        }
        next = p["prompt"].get<std::string>();
      }
      const std::uint64_t old = tasks_.interrupt(world_.time);
      task_target_.reset();
      json result{{"interrupted", old}, {"task", nullptr}};
      if (next) {
        const std::uint64_t id = tasks_.issue(*next, world_.time);
        start_task(id);
        result["task"] = to_json(*tasks_.find(id));
      }
      ++version_;
      return result;
    }

    case CommandKind::Snapshot:
      return to_json(snapshot());
  }
  throw PayloadError("unhandled command");
}

void Session::start_task(std::uint64_t id) {
  tasks_.start(id);
  const Task& t = *tasks_.find(id);
  if (!robot_) {
    tasks_.fail(world_.time, "session has no robot");
    return;
  }
  const std::optional<Vec2> target = targets_.lookup(t.prompt);
  if (!target) {
    tasks_.fail(world_.time, "no target for prompt '" + t.prompt + "'");
    return;
  }
  task_target_ = target;
  robot_goal_ = target;
  world_.find(*robot_)->goal = *target;
}

void Session::apply_pose(const PoseUpdate& update) {
  Agent* a = world_.find(update.object_id);
  if (a == nullptr) {
    return;
  }
  const Vec2 p{update.pose.position.x, update.pose.position.y};
  a->position = p;
  transcript_.push_back({world_.tick, std::nullopt, std::make_pair(a->id, p)});
  ++stats_.pose_updates_applied;
}

void Session::advance() {
  std::optional<Vec2> robot_cmd;
  if (robot_) {
    robot_cmd = robot_goal_ ? policy_(world_, *robot_, *robot_goal_) : Vec2{};
  }
  VelocityCommands commands = crowd_tick(world_, cfg_.orca, cfg_.dt);
  if (robot_cmd) {
    commands[*robot_] = *robot_cmd;
  }
  step_world_in_place(world_, cfg_.dt, commands);
  published_tick_.store(world_.tick);
  last_robot_command_ = robot_cmd;

  if (robot_ && task_target_ && tasks_.executing() != nullptr &&
      norm(world_.find(*robot_)->position - *task_target_) <= cfg_.task_tolerance) {
    tasks_.complete(world_.time);
    task_target_.reset();
    ++version_;
  }
}

Snapshot Session::snapshot() const {
  Snapshot s;
  s.tick = world_.tick;
  s.time = world_.time;
  s.paused = paused_;
  s.version = version_;
  s.robot = robot_;
  s.robot_goal = robot_goal_;
  for (const Agent& a : world_.agents) {
    s.agents.push_back({a.id, a.kind, a.position, a.velocity, a.radius, a.goal});
  }
  s.tasks = tasks_.history();
  s.stats = stats_;
  return s;
}

void write_transcript(std::ostream& out, const Session& session) {
  out << json{{"format", kTranscriptFormat}, {"config", session_config_to_json(session.initial_config())}}
             .dump()
      << '\n';
  for (const TranscriptEntry& e : session.transcript()) {
    json line{{"tick", e.tick}};
    if (e.command) {
      line["command"] = json::parse(encode_command(*e.command));
    } else if (e.pose) {
      line["pose"] = {{"agent", e.pose->first}, {"position", vec_json(e.pose->second)}};
    }
    out << line.dump() << '\n';
  }
  out << json{{"end_tick", session.world().tick}}.dump() << '\n';
}

Transcript read_transcript(std::istream& in) {
  Transcript t;
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("empty transcript");
  }
  const json header = json::parse(line);
  if (header.value("format", "") != kTranscriptFormat) {
    throw std::invalid_argument("not a transcript");
  }
  // The header records the config at session start.
  t.config = session_config_from_json(header.at("config"));
  bool ended = false;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    const json j = json::parse(line);
    if (j.contains("end_tick")) {
      t.end_tick = j["end_tick"].get<std::uint64_t>();
      ended = true;
      break;
    }
    TranscriptEntry e;
    e.tick = j.at("tick").get<std::uint64_t>();
    if (j.contains("command")) {
      e.command = parse_command(j["command"].dump());
    } else {
      const json& p = j.at("pose");
      e.pose = std::make_pair(p.at("agent").get<AgentId>(),
                              vec2_from_json(p.at("position"), "position"));
    }
    t.entries.push_back(std::move(e));
  }
  if (!ended) {
    throw std::invalid_argument("transcript has no end_tick line");
  }
  return t;
}

std::unique_ptr<Session> replay_transcript(const Transcript& t) {
  auto session = std::make_unique<Session>(t.config);
  auto advance_to = [&](std::uint64_t tick) {
    while (session->world().tick < tick) {
      if (session->paused()) {
        throw std::invalid_argument("transcript advances while paused");
      }
      session->step();
    }
  };
  for (const TranscriptEntry& e : t.entries) {
    advance_to(e.tick);
    if (e.command) {
      session->apply(*e.command);
    } else if (e.pose) {
      PoseUpdate u;
      u.object_id = e.pose->first;
      u.pose.position = {e.pose->second.x, e.pose->second.y, 0.0};
      session->apply_pose(u);
    }
  }
  advance_to(t.end_tick);
  return session;
}

}  // namespace dynsim
