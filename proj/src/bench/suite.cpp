// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "dynsim/bench/suite.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <stdexcept>
#include <mutex>
#include <thread>

#include "dynsim/bench/config_json.hpp"

using nlohmann::json;

namespace dynsim {
namespace {

constexpr const char* kManifestFormat = "dynsim-bench-manifest/1";

json template_json(const SuiteConfig& cfg) {
  json t = episode_to_json(cfg.base);
  t.erase("seed");
  t["pedestrians"].erase("count");
  return t;
}

}  // namespace

EpisodeConfig suite_episode(const SuiteConfig& cfg, std::size_t humans, std::size_t index) {
  EpisodeConfig e = cfg.base;
  e.pedestrians.count = humans;
  e.seed = cfg.base_seed + index;
  return e;
}

std::string suite_config_hash(const SuiteConfig& cfg) {
  const json j{{"template", template_json(cfg)},
               {"human_counts", cfg.human_counts},
               {"episodes_per_cell", cfg.episodes_per_cell},
               {"base_seed", cfg.base_seed}};
  return fnv1a_hex(j.dump());
}

SuiteResult run_suite(const SuiteConfig& cfg, const RobotPolicy& policy) {
  if (cfg.episodes_per_cell == 0) {
    throw std::invalid_argument("episodes_per_cell must be at least 1");
  }
  if (cfg.human_counts.empty()) {
    throw std::invalid_argument("no human counts given");
  }
  validate_episode_config(cfg.base);

  SuiteResult out;
  out.config_hash = suite_config_hash(cfg);
  const std::size_t per = cfg.episodes_per_cell;
  const std::size_t total = per * cfg.human_counts.size();
  std::vector<EpisodeResult> results(total);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t k = next++; k < total; k = next++) {
      if (cfg.cancel != nullptr && cfg.cancel->load()) {
        next = total;
        break;
      }
      try {
        results[k] = run_episode(suite_episode(cfg, cfg.human_counts[k / per], k % per), policy);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) {
          failure = std::current_exception();
        }
        next = total;
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(total)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) {
    pool.emplace_back(worker);
  }
  worker();
  for (std::thread& t : pool) {
    t.join();
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
  if (cfg.cancel != nullptr && cfg.cancel->load()) {
    throw SuiteCancelled("suite cancelled");
  }

  for (std::size_t c = 0; c < cfg.human_counts.size(); ++c) {
    SuiteCell cell;
    cell.humans = cfg.human_counts[c];
    cell.results.assign(results.begin() + static_cast<std::ptrdiff_t>(c * per),
                        results.begin() + static_cast<std::ptrdiff_t>((c + 1) * per));
    cell.metrics = aggregate(cell.results);
    out.cells.push_back(std::move(cell));
  }
  return out;
}

std::string format_table(const SuiteResult& result) {
  std::string out =
      "humans\tepisodes\taborted\tsuccess_rate\tcollision_rate\ttimeout_rate\tavg_nav_time\n";
  char line[256];
  for (const SuiteCell& c : result.cells) {
    const BenchMetrics& m = c.metrics;
    char nav[32] = "-";
    if (m.avg_nav_time) {
      std::snprintf(nav, sizeof nav, "%.3f", *m.avg_nav_time);
    }
    std::snprintf(line, sizeof line, "%zu\t%zu\t%zu\t%.4f\t%.4f\t%.4f\t%s\n", c.humans, m.episodes,
                  m.aborted, m.success_rate, m.collision_rate, m.timeout_rate, nav);
    out += line;
  }
  return out;
}

json suite_manifest(const SuiteConfig& cfg, const SuiteResult& result) {
  json cells = json::array();
  for (const SuiteCell& c : result.cells) {
    cells.push_back({{"humans", c.humans}, {"metrics", c.metrics}, {"episodes", c.results}});
  }
  return json{{"format", kManifestFormat},
              {"config_hash", result.config_hash},
              {"base_seed", cfg.base_seed},
              {"episodes_per_cell", cfg.episodes_per_cell},
              {"human_counts", cfg.human_counts},
              {"template", template_json(cfg)},
              {"cells", cells}};
}

SuiteConfig suite_config_from_manifest(const json& manifest) {
  if (manifest.value("format", std::string()) != kManifestFormat) {
    throw std::invalid_argument("not a bench manifest");
  }
  SuiteConfig cfg;
  cfg.base = episode_from_json(manifest.at("template"));
  cfg.human_counts = manifest.at("human_counts").get<std::vector<std::size_t>>();
  cfg.episodes_per_cell = manifest.at("episodes_per_cell").get<std::size_t>();
  cfg.base_seed = manifest.at("base_seed").get<std::uint64_t>();
  if (suite_config_hash(cfg) != manifest.at("config_hash").get<std::string>()) {
    throw std::invalid_argument("manifest config hash does not match its template");
  }
  return cfg;
}

EpisodeResult replay_manifest_episode(const json& manifest, std::size_t cell, std::size_t index) {
  const SuiteConfig cfg = suite_config_from_manifest(manifest);
  if (cell >= cfg.human_counts.size() || index >= cfg.episodes_per_cell) {
    throw std::out_of_range("manifest entry out of range");
  }
  const EpisodeConfig e = suite_episode(cfg, cfg.human_counts[cell], index);
  return run_episode(e, orca_robot_policy(e.orca, e.dt));
}

}  // namespace dynsim
