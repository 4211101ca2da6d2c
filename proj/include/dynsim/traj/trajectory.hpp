// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dynsim/world/geometry.hpp"

namespace dynsim {

struct TrajectorySample {
  double time = 0.0;
  Vec2 position;

  bool operator==(const TrajectorySample&) const = default;
};

struct Trajectory {
  std::int64_t agent_id = 0;
  std::vector<TrajectorySample> samples;

  bool operator==(const Trajectory&) const = default;
};

/// Throws std::invalid_argument unless times are finite and strictly increasing.
void validate_trajectory(const Trajectory& t);

/// Mean displacement over aligned frames. Throws std::invalid_argument on
/// empty input, a length mismatch, or timestamps more than 1e-9 s apart.
double ade(const Trajectory& pred, const Trajectory& gt);
/// Displacement at the final frame; same preconditions as ade().
double fde(const Trajectory& pred, const Trajectory& gt);

/// Extrapolates the velocity of the last two observed frames for `horizon`
/// frames spaced like those two. Throws std::invalid_argument with fewer than
/// two samples.
Trajectory constant_velocity_predict(const Trajectory& observed, std::size_t horizon);

inline constexpr std::size_t kDefaultObsFrames = 8;
inline constexpr std::size_t kDefaultPredFrames = 12;

struct PredictionTask {
  Trajectory observed;
  Trajectory future;
};

/// Every window of obs + pred consecutive samples, advancing by one sample.
std::vector<PredictionTask> prediction_tasks(const Trajectory& t,
                                             std::size_t obs = kDefaultObsFrames,
                                             std::size_t pred = kDefaultPredFrames);

struct PredictionScore {
  std::size_t tasks = 0;
  double ade = 0.0;
  double fde = 0.0;
};

/// Constant-velocity baseline averaged over all windows of all trajectories.
PredictionScore evaluate_constant_velocity(std::span<const Trajectory> trajectories,
                                           std::size_t obs = kDefaultObsFrames,
                                           std::size_t pred = kDefaultPredFrames);

}  // namespace dynsim
