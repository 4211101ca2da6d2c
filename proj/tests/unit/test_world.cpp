// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <string>

#include "dynsim/world/scene.hpp"
#include "dynsim/world/world.hpp"

using namespace dynsim;

namespace {

const std::filesystem::path kScenes = std::filesystem::path(DYNSIM_SOURCE_DIR) / "scenes";

Polygon box(double x0, double y0, double x1, double y1) {
  return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

Scene walled_scene() {
  Scene s;
  s.name = "walled";
  s.bounds = {{0.0, 0.0}, {20.0, 20.0}};
  s.obstacles.push_back(box(10.0, 4.0, 12.0, 6.0));
  s.obstacles.push_back(box(3.0, 12.0, 6.0, 13.0));
  return s;
}

// Brute-force nearest boundary point by dense edge sampling.
Vec2 sampled_nearest(const Polygon& poly, const Vec2& p, int per_edge = 100000) {
  Vec2 best = poly.front();
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % poly.size()];
    for (int k = 0; k <= per_edge; ++k) {
      const Vec2 q = a + (b - a) * (static_cast<double>(k) / per_edge);
      const double d = norm(q - p);
      if (d < best_d) {
        best_d = d;
        best = q;
      }
    }
  }
  return best;
}

Agent walker(Vec2 pos, double max_accel) {
  Agent a;
  a.position = pos;
  a.radius = 0.3;
  a.pref_speed = 1.0;
  a.max_speed = 1.5;
  a.max_accel = max_accel;
  a.goal = pos;
  return a;
}

}  // namespace

TEST_CASE("load_scene: minimal document has no obstacles") {
  const Scene s = parse_scene(R"({"bounds": [[0, 0], [5, 5]]})");
  CHECK(s.obstacles.empty());
  CHECK(s.bounds.max == Vec2{5.0, 5.0});
}

TEST_CASE("load_scene: clockwise square is rejected") {
  const std::string doc =
      R"({"bounds": [[0, 0], [10, 10]], "obstacles": [[[1, 1], [1, 2], [2, 2], [2, 1]]]})";
  try {
    parse_scene(doc);
    FAIL("expected a validation error");
  } catch (const SceneError& e) {
    CHECK(e.kind() == SceneError::Kind::Validation);
    CHECK(std::string(e.what()) == "obstacle 0 not CCW");
  }
}

TEST_CASE("load_scene: validation names the offending element") {
  SUBCASE("non-convex") {
    const std::string doc = R"({"bounds": [[0, 0], [10, 10]],
      "obstacles": [[[1, 1], [4, 1], [2, 2], [4, 4], [1, 4]]]})";
    CHECK_THROWS_WITH_AS(parse_scene(doc), "obstacle 0 not convex", SceneError);
  }
  SUBCASE("region overlapping an obstacle") {
    const std::string doc = R"({"bounds": [[0, 0], [10, 10]],
      "obstacles": [[[1, 1], [3, 1], [3, 3], [1, 3]]],
      "spawn_regions": [[[0.5, 0.5], [2, 2]]]})";
    CHECK_THROWS_WITH_AS(parse_scene(doc), "spawn region 0 overlaps obstacle 0", SceneError);
  }
  SUBCASE("region touching an obstacle edge is allowed") {
    const std::string doc = R"({"bounds": [[0, 0], [10, 10]],
      "obstacles": [[[1, 1], [3, 1], [3, 3], [1, 3]]],
      "goal_regions": [[[3, 0], [5, 5]]]})";
    CHECK_NOTHROW(parse_scene(doc));
  }
  SUBCASE("malformed JSON is a parse error") {
    try {
      parse_scene("{\"bounds\": [[0, 0], ");
      FAIL("expected a parse error");
    } catch (const SceneError& e) {
      CHECK(e.kind() == SceneError::Kind::Parse);
    }
  }
}

TEST_CASE("load_scene: bundled fixtures") {
  CHECK(load_scene(kScenes / "supermarket.scene").obstacles.size() == 8);
  CHECK(load_scene(kScenes / "store.scene").obstacles.size() == 8);
  CHECK_NOTHROW(load_scene(kScenes / "restaurant.scene"));
  CHECK_NOTHROW(load_scene(kScenes / "open_hall.scene"));
  CHECK_THROWS_AS(load_scene(kScenes / "missing.scene"), SceneError);
}

TEST_CASE("scene file round-trips") {
  for (const char* name : {"supermarket.scene", "store.scene", "restaurant.scene"}) {
    const Scene s = load_scene(kScenes / name);
    CHECK(parse_scene(serialize_scene(s)) == s);
  }
  Scene odd = walled_scene();
  odd.obstacles.push_back({{13.1, 1.0 / 3.0}, {14.7, 0.1}, {15.0, 2.0 / 7.0 + 1.0}});
  odd.goal_regions.push_back({{0.1, 0.2}, {1.0 / 3.0, 2.0}});
  CHECK(parse_scene(serialize_scene(odd)) == odd);
}

TEST_CASE("distance_to_nearest_obstacle") {
  SUBCASE("empty scene measures to the bounds") {
    Scene s;
    s.bounds = {{0.0, 0.0}, {10.0, 4.0}};
    CHECK(distance_to_nearest_obstacle(s, {3.0, 1.0}) == doctest::Approx(1.0));
    CHECK(distance_to_nearest_obstacle(s, {5.0, 2.0}) == doctest::Approx(2.0));
  }
  SUBCASE("center of a square obstacle is -half_width") {
    Scene s;
    s.bounds = {{-10.0, -10.0}, {10.0, 10.0}};
    s.obstacles.push_back(box(-1.0, -1.0, 1.0, 1.0));
    CHECK(distance_to_nearest_obstacle(s, {0.0, 0.0}) == doctest::Approx(-1.0).epsilon(1e-15));
  }
  SUBCASE("near a corner matches dense edge sampling") {
    const Scene s = walled_scene();
    for (const Vec2 p : {Vec2{12.1, 6.05}, Vec2{9.93, 3.71}, Vec2{11.5, 6.2}, Vec2{6.4, 13.3}}) {
      double oracle = std::numeric_limits<double>::infinity();
      for (const Polygon& poly : s.obstacles) {
        oracle = std::min(oracle, norm(sampled_nearest(poly, p) - p));
      }
      oracle = std::min(oracle, signed_distance_to_bounds(s.bounds, p));
      CHECK(std::fabs(distance_to_nearest_obstacle(s, p) - oracle) < 1e-6);
    }
  }
}

TEST_CASE("step_world: integration and acceleration limit") {
  WorldState w = make_world(walled_scene(), 1);
  const AgentId id = add_agent(w, walker({2.0, 2.0}, 10.0));

  SUBCASE("one-step integration") {
    const WorldState next = step_world(w, 0.1, {{id, {1.0, 0.0}}});
    const Agent& a = *next.find(id);
    CHECK(a.velocity.x == doctest::Approx(1.0));
    CHECK(a.velocity.y == 0.0);
    CHECK(a.position.x == doctest::Approx(2.1));
    CHECK(next.tick == 1);
    CHECK(next.time == doctest::Approx(0.1));
  }
  SUBCASE("acceleration limited") {
    w.find(id)->max_accel = 0.5;
    const WorldState next = step_world(w, 0.1, {{id, {1.0, 0.0}}});
    CHECK(next.find(id)->velocity.x == doctest::Approx(0.05));
  }
  SUBCASE("agents without a command keep their velocity") {
    w.find(id)->velocity = {0.5, 0.0};
    const WorldState next = step_world(w, 0.1, {});
    CHECK(next.find(id)->velocity == Vec2{0.5, 0.0});
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(step_world(w, 0.1, {{id + 7, {0.0, 0.0}}}), WorldError);
    CHECK_THROWS_AS(step_world(w, 0.1, {{id, {2.0, 0.0}}}), std::invalid_argument);
    CHECK_THROWS_AS(step_world(w, 0.0, {}), std::invalid_argument);
  }
}

TEST_CASE("step_world: wall contact lands on the clearance boundary") {
  WorldState w = make_world(walled_scene(), 1);
  const AgentId id = add_agent(w, walker({9.65, 5.0}, 100.0));
  w.find(id)->velocity = {1.0, 0.0};
  const WorldState next = step_world(w, 0.1, {{id, {1.0, 0.0}}});
  const Agent& a = *next.find(id);

  // Unconstrained position (9.75, 5) penetrates; oracle pushes it out along
  // the direction from the sampled nearest boundary point.
  const Vec2 raw{9.75, 5.0};
  const Vec2 q = sampled_nearest(w.scene->obstacles[0], raw);
  const Vec2 expected = q + normalized(raw - q) * a.radius;
  CHECK(norm(a.position - expected) < 1e-6);
  CHECK(distance_to_nearest_obstacle(*next.scene, a.position) >= a.radius - 1e-9);
}

TEST_CASE("step_world: invariants hold under random commands") {
  Scene s = walled_scene();
  WorldState w = make_world(s, 99);
  Rng cmd_rng(7);
  for (int i = 0; i < 12; ++i) {
    Agent a = walker({1.0 + 1.5 * i, 1.0 + (i % 3) * 6.0}, 0.5 + 0.3 * i);
    add_agent(w, a);
  }
  const double dt = 0.1;
  WorldState replay = w;
  Rng replay_rng = cmd_rng;

  auto random_commands = [](const WorldState& world, Rng& rng) {
    VelocityCommands cmds;
    for (const Agent& a : world.agents) {
      const double ang = rng.uniform(0.0, 6.283185307179586);
      const double speed = rng.uniform(0.0, a.max_speed);
      cmds[a.id] = {speed * std::cos(ang), speed * std::sin(ang)};
    }
    return cmds;
  };

  for (int step = 0; step < 400; ++step) {
    const VelocityCommands cmds = random_commands(w, cmd_rng);
    const WorldState next = step_world(w, dt, cmds);
    for (std::size_t k = 0; k < next.agents.size(); ++k) {
      const Agent& before = w.agents[k];
      const Agent& after = next.agents[k];
      REQUIRE(distance_to_nearest_obstacle(s, after.position) >= after.radius - 1e-6);
      REQUIRE(norm(after.velocity - before.velocity) <= after.max_accel * dt + 1e-9);
      REQUIRE(norm(after.velocity) <= after.max_speed + 1e-9);
    }
    REQUIRE(std::fabs(next.time - static_cast<double>(next.tick) * dt) <= 1e-9);
    w = next;
  }

  for (int step = 0; step < 400; ++step) {
    replay = step_world(replay, dt, random_commands(replay, replay_rng));
  }
  CHECK(replay == w);
}

TEST_CASE("agents stay id-ordered") {
  WorldState w = make_world(walled_scene(), 3);
  const AgentId a = add_agent(w, walker({1.0, 1.0}, 1.0));
  const AgentId b = add_agent(w, walker({2.0, 1.0}, 1.0));
  const AgentId c = add_agent(w, walker({3.0, 1.0}, 1.0));
  CHECK(remove_agent(w, b));
  CHECK_FALSE(remove_agent(w, b));
  const AgentId d = add_agent(w, walker({4.0, 1.0}, 1.0));
  REQUIRE(w.agents.size() == 3);
  CHECK(w.agents[0].id == a);
  CHECK(w.agents[1].id == c);
  CHECK(w.agents[2].id == d);
  CHECK(w.find(b) == nullptr);
}

TEST_CASE("validate_agent rejects broken kinematics") {
  Agent a = walker({1.0, 1.0}, 1.0);
  a.pref_speed = 2.0;
  CHECK_THROWS_AS(validate_agent(a), std::invalid_argument);
  a = walker({1.0, 1.0}, 1.0);
  a.radius = 0.0;
  CHECK_THROWS_AS(validate_agent(a), std::invalid_argument);
}
