// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "../support/lp_oracle.hpp"
#include "dynsim/crowd/neighbor_index.hpp"
#include "dynsim/crowd/orca.hpp"

using namespace dynsim;
using dynsim::testing::LpInstance;

namespace {

Scene open_scene() {
  Scene s;
  s.bounds = {{-100.0, -100.0}, {100.0, 100.0}};
  return s;
}

Agent disc(AgentId id, Vec2 pos, double radius, Vec2 vel = {}) {
  Agent a;
  a.id = id;
  a.position = pos;
  a.velocity = vel;
  a.radius = radius;
  a.pref_speed = 1.0;
  a.max_speed = 1.0;
  a.avoidance_radius = 10.0;
  return a;
}

}  // namespace

TEST_CASE("solve_velocity: unconstrained cases") {
  CHECK(solve_velocity({}, {1.0, 0.0}, 2.0) == Vec2{1.0, 0.0});
  const Vec2 v = solve_velocity({}, {3.0, 0.0}, 2.0);
  CHECK(v.x == doctest::Approx(2.0));
  CHECK(v.y == 0.0);
}

TEST_CASE("solve_velocity: single half-plane projection") {
  // Feasible side x <= 0.1 (direction +y, left side is -x).
  const std::vector<OrcaLine> lines{{{0.1, 0.0}, {0.0, 1.0}}};
  const Vec2 v = solve_velocity(lines, {1.0, 0.5}, 2.0);
  CHECK(v.x == doctest::Approx(0.1));
  CHECK(v.y == doctest::Approx(0.5));
}

TEST_CASE("enumeration oracle agrees with the grid oracle") {
  Rng rng(2024);
  for (int i = 0; i < 40; ++i) {
    const LpInstance lp = dynsim::testing::random_feasible_instance(rng, 4);
    const auto exact = dynsim::testing::enumeration_oracle(lp);
    const auto grid = dynsim::testing::grid_oracle(lp);
    REQUIRE(exact.has_value());
    REQUIRE(grid.has_value());
    CHECK(norm(*exact - lp.pref) <= norm(*grid - lp.pref) + 1e-12);
    CHECK(norm(*grid - lp.pref) - norm(*exact - lp.pref) < 1e-6);
  }
}

TEST_CASE("solve_velocity matches the oracle on random feasible programs") {
  Rng rng(17);
  for (int i = 0; i < 300; ++i) {
    const LpInstance lp = dynsim::testing::random_feasible_instance(rng);
    const auto oracle = dynsim::testing::enumeration_oracle(lp);
    const auto grid = dynsim::testing::grid_oracle(lp, 60, 120);
    REQUIRE(oracle.has_value());
    REQUIRE(grid.has_value());
    const Vec2 v = solve_velocity(lp.lines, lp.pref, lp.max_speed);
    CHECK(std::fabs(norm(v - lp.pref) - norm(*oracle - lp.pref)) < 1e-6);
    CHECK(std::fabs(norm(v - lp.pref) - norm(*grid - lp.pref)) < 1e-6);
    for (const OrcaLine& l : lp.lines) {
      CHECK(violation(l, v) <= 1e-9);
    }
    CHECK(norm(v) <= lp.max_speed + 1e-9);
  }
}

TEST_CASE("solve_velocity: infeasible programs fall back to least violation") {
  // x >= 1 and x <= -1 cannot both hold.
  const std::vector<OrcaLine> lines{{{1.0, 0.0}, {0.0, -1.0}}, {{-1.0, 0.0}, {0.0, 1.0}}};
  const Vec2 v = solve_velocity(lines, {0.3, 0.7}, 2.0);
  CHECK(std::isfinite(v.x));
  CHECK(norm(v) <= 2.0 + 1e-9);
  // The minimax point sits midway.
  CHECK(std::fabs(v.x) < 1e-9);
  CHECK(violation(lines[0], v) == doctest::Approx(violation(lines[1], v)));
}

TEST_CASE("orca_lines: no neighbors and no nearby obstacles") {
  const Agent a = disc(0, {0.0, 0.0}, 0.3);
  const OrcaParams params;
  const OrcaConstraints c = orca_lines(a, std::span<const Agent>{}, open_scene(), params, 0.1);
  CHECK(c.lines.empty());
}

TEST_CASE("orca_lines: two static agents one meter apart") {
  // Gap 1 - 0.6 = 0.4 m may close over tau = 2 s: 0.2 m/s in total, half each.
  const std::vector<Agent> agents{disc(0, {0.0, 0.0}, 0.3), disc(1, {1.0, 0.0}, 0.3)};
  OrcaParams params;
  params.time_horizon_agents = 2.0;
  const OrcaConstraints c = orca_lines(agents[0], agents, open_scene(), params, 0.1);
  REQUIRE(c.lines.size() == 1);
  const OrcaLine& l = c.lines[0];
  CHECK(std::fabs(l.direction.x) < 1e-12);
  CHECK(std::fabs(std::fabs(l.direction.y) - 1.0) < 1e-12);
  CHECK(l.point.x == doctest::Approx(0.1));
  CHECK(violation(l, {0.1 - 1e-6, 0.0}) < 0.0);
  CHECK(violation(l, {0.1 + 1e-6, 0.0}) > 0.0);
}

TEST_CASE("orca_lines: overlapping agents get escape lines") {
  OrcaParams params;
  const double dt = 0.1;
  std::vector<Agent> agents{disc(0, {0.0, 0.0}, 0.3, {0.4, 0.1}),
                            disc(1, {0.45, 0.1}, 0.3, {-0.2, 0.0})};
  const Vec2 gap_before = agents[1].position - agents[0].position;

  const OrcaConstraints c0 = orca_lines(agents[0], agents, open_scene(), params, dt);
  const OrcaConstraints c1 = orca_lines(agents[1], agents, open_scene(), params, dt);
  REQUIRE(c0.lines.size() == 1);
  REQUIRE(c1.lines.size() == 1);

  // Whatever each agent picks on its feasible side, the pair separates.
  Rng rng(5);
  int checked = 0;
  while (checked < 500) {
    const Vec2 v0{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const Vec2 v1{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    if (violation(c0.lines[0], v0) > 0.0 || violation(c1.lines[0], v1) > 0.0) {
      continue;
    }
    ++checked;
    const double rate = dot(normalized(gap_before), v1 - v0);
    CHECK(rate > 0.0);
  }
}

TEST_CASE("orca_lines: coincident centers separate along x") {
  OrcaParams params;
  std::vector<Agent> agents{disc(0, {1.0, 1.0}, 0.3), disc(1, {1.0, 1.0}, 0.3)};
  const OrcaConstraints c0 = orca_lines(agents[0], agents, open_scene(), params, 0.1);
  const OrcaConstraints c1 = orca_lines(agents[1], agents, open_scene(), params, 0.1);
  const Vec2 v0 = solve_velocity(c0.lines, {}, 1.0);
  const Vec2 v1 = solve_velocity(c1.lines, {}, 1.0);
  CHECK(v0.x < 0.0);
  CHECK(v1.x > 0.0);
  CHECK(v0.y == doctest::Approx(0.0));
}

TEST_CASE("orca_lines: wall ahead limits approach speed") {
  Scene s;
  s.bounds = {{0.0, 0.0}, {20.0, 20.0}};
  s.obstacles.push_back({{10.0, 0.0}, {11.0, 0.0}, {11.0, 20.0}, {10.0, 20.0}});
  Agent a = disc(0, {9.0, 10.0}, 0.3, {1.0, 0.0});
  OrcaParams params;
  const OrcaConstraints c = orca_lines(a, std::span<const Agent>{}, s, params, 0.1);
  REQUIRE(c.static_count == 1);
  const Vec2 v = solve_velocity(c.lines, {1.0, 0.0}, 1.0, c.static_count);
  // 0.7 m of clearance may be consumed over the 2 s obstacle horizon.
  CHECK(v.x == doctest::Approx(0.35));
}

TEST_CASE("neighbor index grid path equals brute force") {
  std::vector<Agent> agents;
  Rng rng(11);
  for (AgentId i = 0; i < 400; ++i) {
    Agent a = disc(i, {rng.uniform(0.0, 60.0), rng.uniform(0.0, 60.0)}, 0.3);
    a.avoidance_radius = rng.uniform(1.0, 6.0);
    agents.push_back(a);
  }
  OrcaParams params;
  params.neighbor_limit = 7;
  const NeighborIndex grid(agents, 200);
  REQUIRE(grid.uses_grid());
  for (const Agent& a : agents) {
    CHECK(grid.query(a, params) == select_neighbors(a, agents, params));
  }
}

TEST_CASE("select_neighbors truncates to the nearest") {
  std::vector<Agent> agents{disc(0, {0, 0}, 0.3), disc(1, {3, 0}, 0.3), disc(2, {1, 0}, 0.3),
                            disc(3, {2, 0}, 0.3), disc(4, {20, 0}, 0.3)};
  OrcaParams params;
  params.neighbor_limit = 2;
  const auto n = select_neighbors(agents[0], agents, params);
  REQUIRE(n.size() == 2);
  CHECK(n[0]->id == 2);
  CHECK(n[1]->id == 3);
}

TEST_CASE("solve_velocity: infeasible program with antiparallel lines stays in the disc") {
  // Captured from a bench episode that used to overshoot max_speed.
  const std::vector<OrcaLine> lines{
      {{0, -0.93532849721895583}, {1, 0}},
      {{0, 0.76467150278104412}, {-1, 0}},
      {{-0.051990749477611065, 0.064440329274878333}, {0.044961335227098193, -0.99898872783159898}},
      {{0.99051726749660696, 0.051094066289610808}, {0.99855923057243268, -0.053660628384236859}},
      {{1.0520461327950805, -0.096530277558547373}, {0.96292538393792948, 0.26976787237918259}},
      {{0.28788119935085055, -0.034565413843151288}, {0.20264178757371834, -0.97925293256080059}},
      {{0.993942602605971, 0.10924524762281385}, {-0.99688512100287363, -0.078867328616394505}},
      {{0.99010017911287096, 0.15781514205310762}, {0.99688532985274314, 0.078864688704053623}},
      {{0.77741158605012428, 0.82997902323940353}, {-0.95752853133855254, -0.28833853657226349}}};
  const Vec2 v = solve_velocity(lines, {0.99991665687347198, -0.012910434035280159}, 1.0, 2);
  CHECK(norm(v) <= 1.0 + 1e-12);
  CHECK(violation(lines[0], v) <= 1e-9);
  CHECK(violation(lines[1], v) <= 1e-9);
}
