// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dynsim/traj/trajectory.hpp"
#include "dynsim/world/geometry.hpp"

namespace dynsim {

struct CubicSegment {
  Vec2 p0, p1, p2, p3;

  bool operator==(const CubicSegment&) const = default;
};

struct CubicBezierPath {
  std::vector<CubicSegment> segments;

  bool operator==(const CubicBezierPath&) const = default;
};

inline constexpr double kDefaultTension = 0.25;

struct SmoothResult {
  CubicBezierPath path;
  /// Repeated consecutive waypoints that were merged before fitting.
  std::size_t collapsed = 0;
};

/// One cubic per waypoint interval through every waypoint.
///
/// Interior tangent is the Catmull-Rom tangent scaled by tension,
/// m_i = tension * (P[i+1] - P[i-1]) / 2; the end tangents clamp the missing
/// neighbor to the endpoint itself. Controls are P_i +- m_i / 3,
/// so the path is C1 by construction. Throws std::invalid_argument with fewer
/// than 2 distinct waypoints or tension outside (0, 1).
SmoothResult smooth_waypoints(std::span<const Vec2> waypoints, double tension = kDefaultTension);

Vec2 eval_de_casteljau(const CubicSegment& s, double t);
Vec2 eval_bernstein(const CubicSegment& s, double t);
Vec2 derivative(const CubicSegment& s, double t);

/// C0 and C1 continuity between consecutive segments within `tol`.
bool is_c1(const CubicBezierPath& path, double tol = 1e-9);

struct SampleOptions {
  std::size_t n_per_segment = 64;
  double frame_dt = 1.0 / 30.0;
  /// Space samples evenly by arc length instead of by parameter.
  bool arc_length = false;
};

struct SampledPath {
  Trajectory trajectory;
  /// Unit tangent per sample; zero where the derivative vanishes.
  std::vector<Vec2> headings;
};

/// n_per_segment parameter steps per segment, t = k / (n - 1), with shared
/// segment ends emitted once. Sample k has time k * frame_dt. Throws
/// std::invalid_argument when n_per_segment < 2 or the path is empty.
SampledPath sample_path(const CubicBezierPath& path, const SampleOptions& options = {});

/// Largest turn (radians) between consecutive non-zero headings.
double max_heading_change(std::span<const Vec2> headings);

/// Largest turn (radians) at the interior vertices of a polyline.
double max_corner_turn(std::span<const Vec2> polyline);

}  // namespace dynsim
