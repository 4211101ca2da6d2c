// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynsim/world/geometry.hpp"

namespace dynsim {

/// Convex polygon, counter-clockwise vertex order.
using Polygon = std::vector<Vec2>;

struct Scene {
  std::string name;
  Rect bounds;
  std::vector<Polygon> obstacles;
  std::vector<Rect> spawn_regions;
  std::vector<Rect> goal_regions;

  bool operator==(const Scene&) const = default;
};

class SceneError : public std::runtime_error {
 public:
  enum class Kind { Parse, Validation, Io };

  SceneError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Throws SceneError(Validation) naming the first offending element.
void validate_scene(const Scene& scene);

/// Parses the JSON scene document (see docs/scene_format.md) and validates it.
Scene parse_scene(const std::string& text);
std::string serialize_scene(const Scene& scene);

Scene load_scene(const std::filesystem::path& path);
void save_scene(const Scene& scene, const std::filesystem::path& path);

/// Twice the signed area; positive for counter-clockwise order.
double signed_area2(const Polygon& poly);

/// Signed distance from p to the polygon boundary, negative inside.
double signed_distance(const Polygon& poly, const Vec2& p);

/// Nearest point on the polygon boundary.
Vec2 closest_boundary_point(const Polygon& poly, const Vec2& p);

/// Signed distance to the scene bounds walls, negative outside the bounds.
double signed_distance_to_bounds(const Rect& bounds, const Vec2& p);

/// Exact signed Euclidean distance to the nearest obstacle edge or bound.
double distance_to_nearest_obstacle(const Scene& scene, const Vec2& p);

/// Moves p to the nearest point with clearance >= radius from every obstacle
/// and from the bounds walls. Points already clear are returned unchanged.
Vec2 resolve_penetration(const Scene& scene, const Vec2& p, double radius);

/// True if the rectangle and the convex polygon overlap with positive area.
bool rect_intersects_polygon(const Rect& rect, const Polygon& poly);

}  // namespace dynsim
