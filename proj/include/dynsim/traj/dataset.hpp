// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "dynsim/traj/trajectory.hpp"
#include "dynsim/world/world.hpp"

namespace dynsim {

/// One line of an ETH-style file: frame_id, pedestrian_id, x, y.
struct DatasetRow {
  std::int64_t frame = 0;
  std::int64_t agent = 0;
  Vec2 position;

  bool operator==(const DatasetRow&) const = default;
};

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Collects pedestrian positions every `stride` ticks. The frame id is the
/// world tick.
class TrajectoryRecorder {
 public:
  explicit TrajectoryRecorder(std::size_t stride = 1);

  /// Records when world.tick is a multiple of the stride.
  void observe(const WorldState& world);
  const std::vector<DatasetRow>& rows() const { return rows_; }

 private:
  std::size_t stride_;
  std::vector<DatasetRow> rows_;
};

/// Tab-separated, one row per line, numbers printed with 17 significant digits.
void write_eth(const std::filesystem::path& path, std::span<const DatasetRow> rows);
/// Accepts tab- or space-separated columns. Throws DatasetError naming the line.
std::vector<DatasetRow> read_eth(const std::filesystem::path& path);

/// Groups rows by agent (ascending), time = frame * frame_dt.
std::vector<Trajectory> rows_to_trajectories(std::span<const DatasetRow> rows, double frame_dt);

}  // namespace dynsim
