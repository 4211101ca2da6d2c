// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

// Test-only reference solvers for the ORCA velocity program. Neither shares
// code with the incremental solver under test.

#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "dynsim/crowd/orca.hpp"
#include "dynsim/world/rng.hpp"

namespace dynsim::testing {

struct LpInstance {
  std::vector<OrcaLine> lines;
  Vec2 pref;
  double max_speed = 1.0;
};

inline bool lp_feasible(const LpInstance& lp, const Vec2& v, double tol) {
  if (norm(v) > lp.max_speed + tol) {
    return false;
  }
  for (const OrcaLine& l : lp.lines) {
    if (det(l.direction, l.point - v) > tol) {
      return false;
    }
  }
  return true;
}

/// Exact optimum by enumerating every point that can be optimal: the free
/// optimum, single-constraint projections (lines and disc), and pairwise
/// intersections (line-line and line-disc).
inline std::optional<Vec2> enumeration_oracle(const LpInstance& lp, double tol = 1e-9) {
  std::vector<Vec2> cands;
  const double R = lp.max_speed;
  cands.push_back(lp.pref);
  if (norm(lp.pref) > 0.0) {
    cands.push_back(lp.pref * (R / norm(lp.pref)));
  }
  for (const OrcaLine& l : lp.lines) {
    const Vec2 d = l.direction;
    cands.push_back(l.point + d * dot(d, lp.pref - l.point));
    // Line-disc intersections: |p + t d|^2 = R^2.
    const double b = dot(l.point, d);
    const double c = dot(l.point, l.point) - R * R;
    const double disc = b * b - c;
    if (disc >= 0.0) {
      cands.push_back(l.point + d * (-b + std::sqrt(disc)));
      cands.push_back(l.point + d * (-b - std::sqrt(disc)));
    }
  }
  for (std::size_t i = 0; i < lp.lines.size(); ++i) {
    for (std::size_t j = i + 1; j < lp.lines.size(); ++j) {
      const OrcaLine& a = lp.lines[i];
      const OrcaLine& b = lp.lines[j];
      const double den = det(a.direction, b.direction);
      if (std::fabs(den) < 1e-15) {
        continue;
      }
      const double t = det(b.direction, a.point - b.point) / den;
      cands.push_back(a.point + a.direction * t);
    }
  }
  std::optional<Vec2> best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (const Vec2& c : cands) {
    if (!lp_feasible(lp, c, tol)) {
      continue;
    }
    const double obj = norm(c - lp.pref);
    if (obj < best_obj) {
      best_obj = obj;
      best = c;
    }
  }
  return best;
}

/// Dense polar grid over the speed disc followed by feasible pattern-search
/// refinement. Coarser than the enumeration oracle; used to cross-check it.
inline std::optional<Vec2> grid_oracle(const LpInstance& lp, int rings = 200, int spokes = 400) {
  std::optional<Vec2> best;
  double best_obj = std::numeric_limits<double>::infinity();
  auto consider = [&](const Vec2& v) {
    if (!lp_feasible(lp, v, 0.0)) {
      return;
    }
    const double obj = norm(v - lp.pref);
    if (obj < best_obj) {
      best_obj = obj;
      best = v;
    }
  };
  consider({0.0, 0.0});
  for (int r = 1; r <= rings; ++r) {
    const double rad = lp.max_speed * r / rings;
    for (int s = 0; s < spokes; ++s) {
      const double ang = 2.0 * 3.14159265358979323846 * s / spokes;
      consider({rad * std::cos(ang), rad * std::sin(ang)});
    }
  }
  if (!best) {
    return best;
  }
  // Refinement: Dykstra's alternating projections onto the half-planes and
  // the speed disc converge to the nearest feasible point to pref.
  const std::size_t m = lp.lines.size() + 1;
  std::vector<Vec2> incr(m);
  Vec2 x = lp.pref;
  for (int iter = 0; iter < 200000; ++iter) {
    const Vec2 start = x;
    double incr_change = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const Vec2 y = x + incr[k];
      Vec2 proj = y;
      if (k < lp.lines.size()) {
        const OrcaLine& l = lp.lines[k];
        const double d = violation(l, y);
        if (d > 0.0) {
          proj = y + Vec2{-l.direction.y, l.direction.x} * d;
        }
      } else if (norm(y) > lp.max_speed) {
        proj = y * (lp.max_speed / norm(y));
      }
      incr_change += norm(incr[k] - (y - proj));
      incr[k] = y - proj;
      x = proj;
    }
    if (norm(x - start) < 1e-15 && incr_change < 1e-15) {
      break;
    }
  }
  if (norm(x - lp.pref) < best_obj) {
    best = x;
  }
  return best;
}

/// Random instance whose feasible region contains a point strictly inside
/// the speed disc.
inline LpInstance random_feasible_instance(Rng& rng, std::size_t max_lines = 6) {
  LpInstance lp;
  lp.max_speed = rng.uniform(0.5, 3.0);
  const double pa = rng.uniform(0.0, 6.283185307179586);
  const double pr = rng.uniform(0.0, 1.5 * lp.max_speed);
  lp.pref = {pr * std::cos(pa), pr * std::sin(pa)};
  const double aa = rng.uniform(0.0, 6.283185307179586);
  const double ar = 0.9 * lp.max_speed * std::sqrt(rng.uniform01());
  const Vec2 anchor{ar * std::cos(aa), ar * std::sin(aa)};
  const std::size_t n = 1 + rng.index(max_lines);
  for (std::size_t i = 0; i < n; ++i) {
    const double th = rng.uniform(0.0, 6.283185307179586);
    const Vec2 d{std::cos(th), std::sin(th)};
    const Vec2 left{-d.y, d.x};
    const double margin = rng.uniform(0.0, lp.max_speed);
    const double slide = rng.uniform(-lp.max_speed, lp.max_speed);
    lp.lines.push_back({anchor - left * margin + d * slide, d});
  }
  return lp;
}

}  // namespace dynsim::testing
