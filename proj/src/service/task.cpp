// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "dynsim/service/task.hpp"

#include <algorithm>
#include <cctype>

namespace dynsim {

const char* to_string(TaskStatus s) {
  switch (s) {
    case TaskStatus::Pending:
      return "pending";
    case TaskStatus::Executing:
      return "executing";
    case TaskStatus::Interrupted:
      return "interrupted";
    case TaskStatus::Completed:
      return "completed";
    case TaskStatus::Failed:
      return "failed";
  }
  return "unknown";
}

bool is_allowed_transition(TaskStatus from, TaskStatus to) {
  if (from == TaskStatus::Pending) {
    return to == TaskStatus::Executing;
  }
  if (from == TaskStatus::Executing) {
    return to == TaskStatus::Interrupted || to == TaskStatus::Completed ||
           to == TaskStatus::Failed;
  }
  return false;
}

std::uint64_t TaskBoard::issue(std::string prompt, double now) {
  if (const Task* t = executing()) {
    throw TaskError("task " + std::to_string(t->id) + " is executing");
  }
  Task t;
  t.id = next_id_++;
  t.prompt = std::move(prompt);
  t.issued_at = now;
  tasks_.push_back(std::move(t));
  return tasks_.back().id;
}

void TaskBoard::start(std::uint64_t id) {
  if (executing() != nullptr) {
    throw TaskError("another task is executing");
  }
  for (Task& t : tasks_) {
    if (t.id == id) {
      transition(t, TaskStatus::Executing, t.issued_at);
      return;
    }
  }
  throw TaskError("unknown task " + std::to_string(id));
}

std::uint64_t TaskBoard::interrupt(double now) {
  Task& t = executing_or_throw();
  transition(t, TaskStatus::Interrupted, now);
  return t.id;
}

void TaskBoard::complete(double now) { transition(executing_or_throw(), TaskStatus::Completed, now); }

void TaskBoard::fail(double now, std::string reason) {
  Task& t = executing_or_throw();
  transition(t, TaskStatus::Failed, now);
  t.reason = std::move(reason);
}

const Task* TaskBoard::executing() const {
  for (const Task& t : tasks_) {
    if (t.status == TaskStatus::Executing) {
      return &t;
    }
  }
  return nullptr;
}

const Task* TaskBoard::find(std::uint64_t id) const {
  for (const Task& t : tasks_) {
    if (t.id == id) {
      return &t;
    }
  }
  return nullptr;
}

Task& TaskBoard::executing_or_throw() {
  for (Task& t : tasks_) {
    if (t.status == TaskStatus::Executing) {
      return t;
    }
  }
  throw TaskError("no task is executing");
}

void TaskBoard::transition(Task& t, TaskStatus to, double now) {
  if (!is_allowed_transition(t.status, to)) {
    throw TaskError(std::string("task ") + std::to_string(t.id) + ": " + to_string(t.status) +
                    " -> " + to_string(to) + " is not allowed");
  }
  t.status = to;
  if (to != TaskStatus::Executing) {
    t.ended_at = now;
  }
}

TaskTargets::TaskTargets(const std::map<std::string, Vec2>& targets) {
  for (const auto& [k, v] : targets) {
    set(k, v);
  }
}

void TaskTargets::set(const std::string& prompt, Vec2 target) { targets_[normalize(prompt)] = target; }

std::optional<Vec2> TaskTargets::lookup(const std::string& prompt) const {
  const auto it = targets_.find(normalize(prompt));
  if (it == targets_.end()) {
    return std::nullopt;
  }
  return it->second;
}

std::string TaskTargets::normalize(const std::string& prompt) {
  auto begin = std::find_if_not(prompt.begin(), prompt.end(),
                                [](unsigned char c) { return std::isspace(c); });
  auto end = std::find_if_not(prompt.rbegin(), std::make_reverse_iterator(begin),
                              [](unsigned char c) { return std::isspace(c); })
                 .base();
  std::string out(begin, end);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace dynsim
