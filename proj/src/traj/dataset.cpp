// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "dynsim/traj/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>

namespace dynsim {

TrajectoryRecorder::TrajectoryRecorder(std::size_t stride) : stride_(stride) {
  if (stride == 0) {
    throw std::invalid_argument("recording stride must be positive");
  }
}

void TrajectoryRecorder::observe(const WorldState& world) {
  if (world.tick % stride_ != 0) {
    return;
  }
  for (const Agent& a : world.agents) {
    if (a.kind == AgentKind::Pedestrian) {
      rows_.push_back({static_cast<std::int64_t>(world.tick), static_cast<std::int64_t>(a.id),
                       a.position});
    }
  }
}

void write_eth(const std::filesystem::path& path, std::span<const DatasetRow> rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw DatasetError("cannot open " + path.string() + " for writing");
  }
  char line[160];
  for (const DatasetRow& r : rows) {
    std::snprintf(line, sizeof line, "%lld\t%lld\t%.17g\t%.17g\n",
                  static_cast<long long>(r.frame), static_cast<long long>(r.agent), r.position.x,
                  r.position.y);
    out << line;
  }
  if (!out) {
    throw DatasetError("write failed for " + path.string());
  }
}

std::vector<DatasetRow> read_eth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DatasetError("cannot open " + path.string());
  }
  std::vector<DatasetRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    std::istringstream ss(line);
    DatasetRow r;
    double frame = 0.0;
    double agent = 0.0;
    if (!(ss >> frame >> agent >> r.position.x >> r.position.y)) {
      throw DatasetError(path.string() + ":" + std::to_string(lineno) + ": expected 4 columns");
    }
    r.frame = static_cast<std::int64_t>(frame);
    r.agent = static_cast<std::int64_t>(agent);
    rows.push_back(r);
  }
  return rows;
}

std::vector<Trajectory> rows_to_trajectories(std::span<const DatasetRow> rows, double frame_dt) {
  std::map<std::int64_t, Trajectory> by_agent;
  for (const DatasetRow& r : rows) {
    Trajectory& t = by_agent[r.agent];
    t.agent_id = r.agent;
    t.samples.push_back({static_cast<double>(r.frame) * frame_dt, r.position});
  }
  std::vector<Trajectory> out;
  for (auto& [id, t] : by_agent) {
    validate_trajectory(t);
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace dynsim
