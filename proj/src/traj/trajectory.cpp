// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "dynsim/traj/trajectory.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace dynsim {
namespace {

constexpr double kTimeAlignTol = 1e-9;

void check_aligned(const Trajectory& pred, const Trajectory& gt) {
  if (pred.samples.empty()) {
    throw std::invalid_argument("empty trajectory");
  }
  if (pred.samples.size() != gt.samples.size()) {
    throw std::invalid_argument("length mismatch: " + std::to_string(pred.samples.size()) +
                                " predicted vs " + std::to_string(gt.samples.size()) +
                                " ground-truth frames");
  }
  for (std::size_t i = 0; i < pred.samples.size(); ++i) {
    if (std::fabs(pred.samples[i].time - gt.samples[i].time) > kTimeAlignTol) {
      throw std::invalid_argument("timestamps differ at frame " + std::to_string(i));
    }
  }
}

}  // namespace

void validate_trajectory(const Trajectory& t) {
  for (std::size_t i = 0; i < t.samples.size(); ++i) {
    if (!std::isfinite(t.samples[i].time) || !is_finite(t.samples[i].position)) {
      throw std::invalid_argument("non-finite sample " + std::to_string(i));
    }
    if (i > 0 && !(t.samples[i].time > t.samples[i - 1].time)) {
      throw std::invalid_argument("times not strictly increasing at sample " + std::to_string(i));
    }
  }
}

double ade(const Trajectory& pred, const Trajectory& gt) {
  check_aligned(pred, gt);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.samples.size(); ++i) {
    sum += norm(pred.samples[i].position - gt.samples[i].position);
  }
  return sum / static_cast<double>(pred.samples.size());
}

double fde(const Trajectory& pred, const Trajectory& gt) {
  check_aligned(pred, gt);
  return norm(pred.samples.back().position - gt.samples.back().position);
}

Trajectory constant_velocity_predict(const Trajectory& observed, std::size_t horizon) {
  if (observed.samples.size() < 2) {
    throw std::invalid_argument("constant-velocity prediction needs 2 observed frames");
  }
  const TrajectorySample& last = observed.samples.back();
  const TrajectorySample& prev = observed.samples[observed.samples.size() - 2];
  const double dt = last.time - prev.time;
  if (!(dt > 0.0)) {
    throw std::invalid_argument("observed times not increasing");
  }
  const Vec2 step = last.position - prev.position;
  Trajectory out;
  out.agent_id = observed.agent_id;
  for (std::size_t k = 1; k <= horizon; ++k) {
    const double kk = static_cast<double>(k);
    out.samples.push_back({last.time + kk * dt, last.position + step * kk});
  }
  return out;
}

std::vector<PredictionTask> prediction_tasks(const Trajectory& t, std::size_t obs,
                                             std::size_t pred) {
  if (obs < 2 || pred < 1) {
    throw std::invalid_argument("need obs >= 2 and pred >= 1");
  }
  std::vector<PredictionTask> tasks;
  const std::size_t window = obs + pred;
  for (std::size_t start = 0; start + window <= t.samples.size(); ++start) {
    PredictionTask task;
    task.observed.agent_id = task.future.agent_id = t.agent_id;
    const auto first = t.samples.begin() + static_cast<std::ptrdiff_t>(start);
    task.observed.samples.assign(first, first + static_cast<std::ptrdiff_t>(obs));
    task.future.samples.assign(first + static_cast<std::ptrdiff_t>(obs),
                               first + static_cast<std::ptrdiff_t>(window));
    tasks.push_back(std::move(task));
  }
  return tasks;
}

PredictionScore evaluate_constant_velocity(std::span<const Trajectory> trajectories,
                                           std::size_t obs, std::size_t pred) {
  PredictionScore score;
  for (const Trajectory& t : trajectories) {
    for (const PredictionTask& task : prediction_tasks(t, obs, pred)) {
      const Trajectory p = constant_velocity_predict(task.observed, pred);
      // Recorded frames can be unevenly spaced; score on the truth's clock.
      Trajectory aligned = p;
      for (std::size_t i = 0; i < aligned.samples.size(); ++i) {
        aligned.samples[i].time = task.future.samples[i].time;
      }
      score.ade += ade(aligned, task.future);
      score.fde += fde(aligned, task.future);
      ++score.tasks;
    }
  }
  if (score.tasks > 0) {
    score.ade /= static_cast<double>(score.tasks);
    score.fde /= static_cast<double>(score.tasks);
  }
  return score;
}

}  // namespace dynsim
