// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "dynsim/crowd/orca.hpp"

namespace dynsim {

/// Neighbor lookup over a frozen agent snapshot. Below `grid_threshold`
/// agents it scans all of them; above, it buckets agents into a uniform grid
/// whose cell size is the largest avoidance radius. Both paths return exactly
/// what select_neighbors returns.
class NeighborIndex {
 public:
  static constexpr std::size_t kDefaultGridThreshold = 200;

  explicit NeighborIndex(std::span<const Agent> agents,
                         std::size_t grid_threshold = kDefaultGridThreshold);

  std::vector<const Agent*> query(const Agent& self, const OrcaParams& params) const;

  bool uses_grid() const { return use_grid_; }

 private:
  static std::uint64_t key(std::int64_t cx, std::int64_t cy);
  std::int64_t cell_of(double v) const;

  std::span<const Agent> agents_;
  bool use_grid_ = false;
  double cell_size_ = 1.0;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

}  // namespace dynsim
