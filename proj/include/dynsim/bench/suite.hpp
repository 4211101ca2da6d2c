// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dynsim/bench/episode.hpp"

namespace dynsim {

struct SuiteConfig {
  /// Template; pedestrians.count and seed are overwritten per episode.
  EpisodeConfig base;
  std::vector<std::size_t> human_counts;
  std::size_t episodes_per_cell = 1;
  std::uint64_t base_seed = 0;
  /// Worker threads; results do not depend on this.
  unsigned threads = 1;
  /// Polled between episodes; when set, run_suite throws SuiteCancelled.
  const std::atomic<bool>* cancel = nullptr;
};

class SuiteCancelled : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SuiteCell {
  std::size_t humans = 0;
  BenchMetrics metrics;
  std::vector<EpisodeResult> results;
};

struct SuiteResult {
  std::vector<SuiteCell> cells;
  std::string config_hash;
};

/// Episode i of every cell uses seed base_seed + i.
SuiteResult run_suite(const SuiteConfig& cfg, const RobotPolicy& policy);

/// Episode config for one manifest entry.
EpisodeConfig suite_episode(const SuiteConfig& cfg, std::size_t humans, std::size_t index);

/// FNV-1a of the canonical JSON of the template, counts, episodes and base
/// seed.
std::string suite_config_hash(const SuiteConfig& cfg);

/// Tab-separated table, one row per cell:
/// humans episodes aborted success_rate collision_rate timeout_rate avg_nav_time
std::string format_table(const SuiteResult& result);

/// Manifest: format tag, config hash, template, and per-cell metrics plus
/// every episode's seed and result.
nlohmann::json suite_manifest(const SuiteConfig& cfg, const SuiteResult& result);

/// Rebuilds the suite config a manifest was produced from.
SuiteConfig suite_config_from_manifest(const nlohmann::json& manifest);

/// Re-runs one manifest episode with the ORCA robot policy.
EpisodeResult replay_manifest_episode(const nlohmann::json& manifest, std::size_t cell,
                                      std::size_t index);

}  // namespace dynsim
