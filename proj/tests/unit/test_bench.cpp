// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "dynsim/bench/config_json.hpp"
#include "dynsim/bench/episode.hpp"
#include "dynsim/bench/suite.hpp"

using namespace dynsim;

namespace {

const std::filesystem::path kScenes = std::filesystem::path(DYNSIM_SOURCE_DIR) / "scenes";

std::shared_ptr<const Scene> scene(const char* name) {
  return std::make_shared<const Scene>(load_scene(kScenes / name));
}

EpisodeConfig hall_episode() {
  EpisodeConfig cfg;
  cfg.scene = scene("open_hall.scene");
  cfg.pedestrians.count = 0;
  cfg.robot.start = {2.0, 5.0};
  cfg.robot.goal = {27.0, 5.0};
  return cfg;
}

EpisodeResult result_of(Outcome o, std::optional<double> t = std::nullopt) {
  EpisodeResult r;
  r.outcome = o;
  r.nav_time = t;
  return r;
}

Vec2 zero_policy(const WorldState&, AgentId, const Vec2&) { return {}; }

}  // namespace

TEST_CASE("run_episode: empty open hall is a straight run") {
  const EpisodeConfig cfg = hall_episode();
  const EpisodeResult r = run_episode(cfg, orca_robot_policy(cfg.orca, cfg.dt));
  REQUIRE(r.outcome == Outcome::Success);
  REQUIRE(r.nav_time.has_value());
  const double dist = norm(cfg.robot.goal - cfg.robot.start);
  CHECK(std::fabs(*r.nav_time - dist / cfg.robot.max_speed) <= cfg.dt);
  CHECK(*r.nav_time >= (dist - cfg.success_tolerance) / cfg.robot.max_speed - 1e-9);
  CHECK(r.path_length == doctest::Approx(dist - cfg.success_tolerance).epsilon(0.01));
  CHECK(r.min_human_distance == std::numeric_limits<double>::infinity());
}

TEST_CASE("run_episode: start equal to goal succeeds immediately") {
  EpisodeConfig cfg = hall_episode();
  cfg.robot.goal = cfg.robot.start;
  const EpisodeResult r = run_episode(cfg, orca_robot_policy(cfg.orca, cfg.dt));
  CHECK(r.outcome == Outcome::Success);
  CHECK(r.nav_time == 0.0);
  CHECK(r.ticks == 0);
}

TEST_CASE("run_episode: pedestrian on top of a still robot collides at tick 0") {
  EpisodeConfig cfg = hall_episode();
  cfg.scripted.push_back({cfg.robot.start, cfg.robot.start});
  const EpisodeResult r = run_episode(cfg, zero_policy);
  CHECK(r.outcome == Outcome::Collision);
  CHECK(r.ticks == 0);
  CHECK(r.min_human_distance < cfg.robot.radius + cfg.scripted[0].radius);
  CHECK_FALSE(r.nav_time.has_value());
}

TEST_CASE("run_episode: still robot times out") {
  EpisodeConfig cfg = hall_episode();
  cfg.timeout = 1.0;
  const EpisodeResult r = run_episode(cfg, zero_policy);
  CHECK(r.outcome == Outcome::Timeout);
  CHECK(r.ticks == 10);
}

TEST_CASE("run_episode: policy failures abort") {
  EpisodeConfig cfg = hall_episode();
  const EpisodeResult thrown = run_episode(
      cfg, [](const WorldState&, AgentId, const Vec2&) -> Vec2 { throw std::runtime_error("boom"); });
  CHECK(thrown.outcome == Outcome::Aborted);
  CHECK(thrown.error == "boom");
  const EpisodeResult fast =
      run_episode(cfg, [](const WorldState&, AgentId, const Vec2&) { return Vec2{5.0, 0.0}; });
  CHECK(fast.outcome == Outcome::Aborted);
}

TEST_CASE("run_episode: invalid configs are rejected") {
  EpisodeConfig cfg = hall_episode();
  cfg.timeout = 0.0;
  CHECK_THROWS_AS(run_episode(cfg, zero_policy), std::invalid_argument);
  cfg = hall_episode();
  cfg.robot.goal = {40.0, 5.0};
  CHECK_THROWS_AS(run_episode(cfg, zero_policy), std::invalid_argument);
  cfg = hall_episode();
  cfg.scene = nullptr;
  CHECK_THROWS_AS(run_episode(cfg, zero_policy), std::invalid_argument);
}

TEST_CASE("aggregate") {
  SUBCASE("all successes") {
    std::vector<EpisodeResult> rs(10, result_of(Outcome::Success, 30.0));
    const BenchMetrics m = aggregate(rs);
    CHECK(m.episodes == 10);
    CHECK(m.success_rate == 1.0);
    CHECK(m.collision_rate == 0.0);
    CHECK(m.timeout_rate == 0.0);
    CHECK(m.avg_nav_time == 30.0);
  }
  SUBCASE("mixed outcomes") {
    std::vector<EpisodeResult> rs;
    for (double t : {30.0, 40.0, 50.0, 30.0, 40.0, 50.0}) {
      rs.push_back(result_of(Outcome::Success, t));
    }
    rs.push_back(result_of(Outcome::Collision));
    rs.push_back(result_of(Outcome::Collision));
    rs.push_back(result_of(Outcome::Timeout));
    rs.push_back(result_of(Outcome::Timeout));
    rs.push_back(result_of(Outcome::Aborted));
    const BenchMetrics m = aggregate(rs);
    CHECK(m.episodes == 10);
    CHECK(m.aborted == 1);
    CHECK(m.success_rate == doctest::Approx(0.6));
    CHECK(m.collision_rate == doctest::Approx(0.2));
    CHECK(m.timeout_rate == doctest::Approx(0.2));
    CHECK(std::fabs(m.success_rate + m.collision_rate + m.timeout_rate - 1.0) <= 1e-9);
    CHECK(*m.avg_nav_time == doctest::Approx(40.0));
  }
  SUBCASE("no successes leaves avg_nav_time empty") {
    std::vector<EpisodeResult> rs{result_of(Outcome::Timeout)};
    CHECK_FALSE(aggregate(rs).avg_nav_time.has_value());
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(aggregate({}), std::invalid_argument);
    std::vector<EpisodeResult> rs{result_of(Outcome::Aborted)};
    CHECK_THROWS_AS(aggregate(rs), std::invalid_argument);
  }
}

TEST_CASE("orca_robot_policy") {
  const OrcaParams params;
  const double dt = 0.1;
  const RobotPolicy policy = orca_robot_policy(params, dt);
  EpisodeConfig cfg = hall_episode();

  SUBCASE("open scene heads for the goal at full speed") {
    const WorldState w = make_episode_world(cfg);
    const Vec2 v = policy(w, 0, cfg.robot.goal);
    CHECK(v.x == doctest::Approx(cfg.robot.max_speed));
    CHECK(v.y == doctest::Approx(0.0));
    CHECK(policy(w, 0, cfg.robot.goal) == v);
  }
  SUBCASE("oncoming pedestrian's constraint holds") {
    cfg.scripted.push_back({{4.0, 5.05}, {1.0, 5.05}});
    WorldState w = make_episode_world(cfg);
    w.agents[0].velocity = {1.0, 0.0};
    w.agents[1].velocity = {-1.0, 0.0};
    const Vec2 v = policy(w, 0, cfg.robot.goal);
    const std::vector<Agent> others{w.agents[1]};
    const OrcaConstraints c = orca_lines(w.agents[0], others, *w.scene, params, dt);
    REQUIRE(c.lines.size() == c.static_count + 1);
    for (const OrcaLine& l : c.lines) {
      CHECK(violation(l, v) <= 1e-9);
    }
    CHECK(norm(v) <= cfg.robot.max_speed + 1e-9);
    // Deflects away rather than driving straight on.
    CHECK(std::fabs(v.y) > 1e-3);
  }
  SUBCASE("slows down instead of overshooting the goal") {
    cfg.robot.goal = {2.05, 5.0};
    cfg.success_tolerance = 0.0;
    const WorldState w = make_episode_world(cfg);
    CHECK(policy(w, 0, cfg.robot.goal).x == doctest::Approx(0.5));
  }
}

TEST_CASE("run_suite: empty cell always succeeds") {
  SuiteConfig s;
  s.base = hall_episode();
  s.human_counts = {0};
  s.episodes_per_cell = 5;
  s.base_seed = 9;
  const SuiteResult r = run_suite(s, orca_robot_policy(s.base.orca, s.base.dt));
  REQUIRE(r.cells.size() == 1);
  CHECK(r.cells[0].metrics.success_rate == 1.0);
  CHECK(r.cells[0].results.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(r.cells[0].results[i].seed == 9 + i);
  }
  const std::string table = format_table(r);
  CHECK(table.rfind("humans\tepisodes\taborted\tsuccess_rate", 0) == 0);
}

TEST_CASE("run_suite: manifest replays bit-identically and threads do not matter") {
  SuiteConfig s;
  s.base = hall_episode();
  s.base.scene = scene("store.scene");
  s.base.robot.start = {1.5, 7.0};
  s.base.robot.goal = {22.5, 7.0};
  s.human_counts = {5, 15};
  s.episodes_per_cell = 6;
  s.base_seed = 300;
  const RobotPolicy policy = orca_robot_policy(s.base.orca, s.base.dt);
  const SuiteResult serial = run_suite(s, policy);
  s.threads = 3;
  const SuiteResult parallel = run_suite(s, policy);
  REQUIRE(parallel.cells.size() == serial.cells.size());
  for (std::size_t c = 0; c < serial.cells.size(); ++c) {
    CHECK(parallel.cells[c].results == serial.cells[c].results);
    CHECK(parallel.cells[c].metrics == serial.cells[c].metrics);
  }
  CHECK(parallel.config_hash == serial.config_hash);

  // Manifests go through text to mimic a saved file.
  const nlohmann::json manifest =
      nlohmann::json::parse(suite_manifest(s, serial).dump(2));
  for (std::size_t c = 0; c < serial.cells.size(); ++c) {
    for (std::size_t i = 0; i < s.episodes_per_cell; ++i) {
      CHECK(replay_manifest_episode(manifest, c, i) == serial.cells[c].results[i]);
      const EpisodeResult stored = manifest["cells"][c]["episodes"][i].get<EpisodeResult>();
      CHECK(stored == serial.cells[c].results[i]);
    }
  }
  for (const SuiteCell& cell : serial.cells) {
    for (const EpisodeResult& r : cell.results) {
      if (r.outcome == Outcome::Success) {
        const double dist = norm(s.base.robot.goal - s.base.robot.start);
        CHECK(*r.nav_time >= (dist - s.base.success_tolerance) / s.base.robot.max_speed);
      }
      if (r.outcome == Outcome::Collision) {
        CHECK(r.min_human_distance < s.base.robot.radius + s.base.pedestrians.radius.max);
      }
    }
  }

  nlohmann::json tampered = manifest;
  tampered["base_seed"] = 301;
  CHECK_THROWS_AS(suite_config_from_manifest(tampered), std::invalid_argument);
}

TEST_CASE("episode config JSON round-trips and rejects unknown keys") {
  EpisodeConfig cfg = hall_episode();
  cfg.seed = 12345678901234ULL;
  cfg.scripted.push_back({{3.0, 3.0}, {3.0, 3.0}, 0.25, 0.9, 1.5});
  cfg.pedestrians.goal_resample = GoalResample::Never;
  const nlohmann::json j = episode_to_json(cfg);
  const EpisodeConfig back = episode_from_json(nlohmann::json::parse(j.dump()));
  CHECK(*back.scene == *cfg.scene);
  CHECK(back.scripted == cfg.scripted);
  CHECK(back.robot == cfg.robot);
  CHECK(back.seed == cfg.seed);
  CHECK(episode_to_json(back) == j);

  nlohmann::json bad = j;
  bad["robot"]["wheels"] = 4;
  CHECK_THROWS_AS(episode_from_json(bad), std::invalid_argument);
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}
