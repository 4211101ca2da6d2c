// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynsim/world/geometry.hpp"

namespace dynsim {

enum class TaskStatus { Pending, Executing, Interrupted, Completed, Failed };

const char* to_string(TaskStatus s);

/// Pending -> Executing -> {Interrupted, Completed, Failed}; nothing else.
bool is_allowed_transition(TaskStatus from, TaskStatus to);

struct Task {
  std::uint64_t id = 0;
  std::string prompt;
  TaskStatus status = TaskStatus::Pending;
  /// Simulated seconds.
  double issued_at = 0.0;
  std::optional<double> ended_at;
  /// Set for Failed tasks.
  std::string reason;

  bool operator==(const Task&) const = default;
};

class TaskError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Task history with at most one Executing task.
class TaskBoard {
 public:
  /// Appends a Pending task. Throws TaskError if a task is Executing.
  std::uint64_t issue(std::string prompt, double now);
  /// Pending -> Executing for `id`.
  void start(std::uint64_t id);
  /// Executing -> Interrupted. Throws TaskError when nothing is Executing.
  std::uint64_t interrupt(double now);
  void complete(double now);
  void fail(double now, std::string reason);

  const Task* executing() const;
  const Task* find(std::uint64_t id) const;
  const std::vector<Task>& history() const { return tasks_; }

 private:
  Task& executing_or_throw();
  void transition(Task& t, TaskStatus to, double now);

  std::vector<Task> tasks_;
  std::uint64_t next_id_ = 1;
};

/// Prompt-keyed navigation targets for the task executor. Keys match after
/// trimming and lower-casing.
class TaskTargets {
 public:
  TaskTargets() = default;
  explicit TaskTargets(const std::map<std::string, Vec2>& targets);

  void set(const std::string& prompt, Vec2 target);
  std::optional<Vec2> lookup(const std::string& prompt) const;
  const std::map<std::string, Vec2>& entries() const { return targets_; }

  static std::string normalize(const std::string& prompt);

 private:
  std::map<std::string, Vec2> targets_;
};

}  // namespace dynsim
