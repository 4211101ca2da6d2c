// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "dynsim/crowd/neighbor_index.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace dynsim {

NeighborIndex::NeighborIndex(std::span<const Agent> agents, std::size_t grid_threshold)
    : agents_(agents), use_grid_(agents.size() > grid_threshold) {
  if (!use_grid_) {
    return;
  }
  double max_range = 0.0;
  for (const Agent& a : agents_) {
    max_range = std::max(max_range, a.avoidance_radius);
  }
  cell_size_ = max_range > 0.0 ? max_range : 1.0;
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    const Vec2& p = agents_[i].position;
    cells_[key(cell_of(p.x), cell_of(p.y))].push_back(i);
  }
}

std::uint64_t NeighborIndex::key(std::int64_t cx, std::int64_t cy) {
  return (static_cast<std::uint64_t>(cx) << 32) ^ static_cast<std::uint32_t>(cy);
}

std::int64_t NeighborIndex::cell_of(double v) const {
  return static_cast<std::int64_t>(std::floor(v / cell_size_));
}

std::vector<const Agent*> NeighborIndex::query(const Agent& self, const OrcaParams& params) const {
  if (!use_grid_) {
    return select_neighbors(self, agents_, params);
  }
  const double range = self.avoidance_radius;
  const double range_sq = range * range;
  std::vector<std::pair<double, const Agent*>> found;
  const std::int64_t x0 = cell_of(self.position.x - range);
  const std::int64_t x1 = cell_of(self.position.x + range);
  const std::int64_t y0 = cell_of(self.position.y - range);
  const std::int64_t y1 = cell_of(self.position.y + range);
  for (std::int64_t cx = x0; cx <= x1; ++cx) {
    for (std::int64_t cy = y0; cy <= y1; ++cy) {
      auto it = cells_.find(key(cx, cy));
      if (it == cells_.end()) {
        continue;
      }
      for (std::size_t idx : it->second) {
        const Agent& other = agents_[idx];
        if (other.id == self.id) {
          continue;
        }
        const double d = abs_sq(other.position - self.position);
        if (d <= range_sq) {
          found.emplace_back(d, &other);
        }
      }
    }
  }
  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
    return std::tie(a.first, a.second->id) < std::tie(b.first, b.second->id);
  });
  if (found.size() > params.neighbor_limit) {
    found.resize(params.neighbor_limit);
  }
  std::vector<const Agent*> out;
  out.reserve(found.size());
  for (const auto& f : found) {
    out.push_back(f.second);
  }
  return out;
}

}  // namespace dynsim
