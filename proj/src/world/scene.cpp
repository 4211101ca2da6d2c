// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "dynsim/world/scene.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace dynsim {
namespace {

using nlohmann::json;

constexpr const char* kFormatTag = "dynsim-scene/1";

[[noreturn]] void fail_validation(const std::string& msg) {
  throw SceneError(SceneError::Kind::Validation, msg);
}

[[noreturn]] void fail_parse(const std::string& msg) {
  throw SceneError(SceneError::Kind::Parse, msg);
}

Vec2 parse_point(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    fail_parse(where + ": expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

Rect parse_rect(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) {
    fail_parse(where + ": expected [[min_x, min_y], [max_x, max_y]]");
  }
  return {parse_point(j[0], where + ".min"), parse_point(j[1], where + ".max")};
}

std::vector<Rect> parse_rects(const json& doc, const char* key) {
  std::vector<Rect> out;
  if (!doc.contains(key)) {
    return out;
  }
  const json& arr = doc.at(key);
  if (!arr.is_array()) {
    fail_parse(std::string(key) + ": expected an array");
  }
  for (std::size_t i = 0; i < arr.size(); ++i) {
    out.push_back(parse_rect(arr[i], std::string(key) + "[" + std::to_string(i) + "]"));
  }
  return out;
}

json point_json(const Vec2& p) { return json::array({p.x, p.y}); }

json rect_json(const Rect& r) { return json::array({point_json(r.min), point_json(r.max)}); }

bool rect_valid(const Rect& r) {
  return is_finite(r.min) && is_finite(r.max) && r.max.x > r.min.x && r.max.y > r.min.y;
}

bool rect_inside(const Rect& inner, const Rect& outer) {
  return outer.contains(inner.min) && outer.contains(inner.max);
}

void validate_regions(const Scene& scene, const std::vector<Rect>& regions, const char* label) {
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const Rect& r = regions[i];
    if (!rect_valid(r)) {
      fail_validation(std::string(label) + " " + std::to_string(i) + " is empty or non-finite");
    }
    if (!rect_inside(r, scene.bounds)) {
      fail_validation(std::string(label) + " " + std::to_string(i) + " outside bounds");
    }
    for (std::size_t k = 0; k < scene.obstacles.size(); ++k) {
      if (rect_intersects_polygon(r, scene.obstacles[k])) {
        fail_validation(std::string(label) + " " + std::to_string(i) + " overlaps obstacle " +
                        std::to_string(k));
      }
    }
  }
}

// Projects the polygon onto axis and returns [lo, hi].
std::pair<double, double> project(const Polygon& poly, const Vec2& axis) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Vec2& v : poly) {
    const double s = dot(v, axis);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return {lo, hi};
}

Vec2 outward_normal(const Vec2& a, const Vec2& b) { return normalized(Vec2{b.y - a.y, a.x - b.x}); }

}  // namespace

double signed_area2(const Polygon& poly) {
  double sum = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    sum += det(poly[i], poly[(i + 1) % poly.size()]);
  }
  return sum;
}

bool rect_intersects_polygon(const Rect& rect, const Polygon& poly) {
  const Polygon corners{rect.min, {rect.max.x, rect.min.y}, rect.max, {rect.min.x, rect.max.y}};
  std::vector<Vec2> axes{{1.0, 0.0}, {0.0, 1.0}};
  for (std::size_t i = 0; i < poly.size(); ++i) {
    axes.push_back(outward_normal(poly[i], poly[(i + 1) % poly.size()]));
  }
  for (const Vec2& axis : axes) {
    const auto [a_lo, a_hi] = project(corners, axis);
    const auto [b_lo, b_hi] = project(poly, axis);
    // Touching along an edge is not an overlap.
    if (a_hi <= b_lo || b_hi <= a_lo) {
      return false;
    }
  }
  return true;
}

void validate_scene(const Scene& scene) {
  if (!rect_valid(scene.bounds)) {
    fail_validation("bounds are empty or non-finite");
  }
  for (std::size_t i = 0; i < scene.obstacles.size(); ++i) {
    const Polygon& poly = scene.obstacles[i];
    const std::string label = "obstacle " + std::to_string(i);
    if (poly.size() < 3) {
      fail_validation(label + " has fewer than 3 vertices");
    }
    bool any_pos = false;
    bool any_nonpos = false;
    for (std::size_t k = 0; k < poly.size(); ++k) {
      if (!is_finite(poly[k])) {
        fail_validation(label + " has a non-finite vertex");
      }
      const Vec2& a = poly[k];
      const Vec2& b = poly[(k + 1) % poly.size()];
      const Vec2& c = poly[(k + 2) % poly.size()];
      const double turn = det(b - a, c - b);
      any_pos = any_pos || turn > 0.0;
      any_nonpos = any_nonpos || turn <= 0.0;
    }
    if (!any_pos && signed_area2(poly) < 0.0) {
      fail_validation(label + " not CCW");
    }
    if (any_nonpos) {
      fail_validation(label + " not convex");
    }
    for (const Vec2& v : poly) {
      if (!scene.bounds.contains(v)) {
        fail_validation(label + " outside bounds");
      }
    }
  }
  validate_regions(scene, scene.spawn_regions, "spawn region");
  validate_regions(scene, scene.goal_regions, "goal region");
}

Scene parse_scene(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail_parse(std::string("scene is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) {
    fail_parse("scene document must be an object");
  }
  if (doc.contains("format") && doc["format"] != kFormatTag) {
    fail_parse("unsupported scene format tag");
  }
  if (!doc.contains("bounds")) {
    fail_parse("missing bounds");
  }
  Scene scene;
  scene.name = doc.value("name", std::string{});
  scene.bounds = parse_rect(doc["bounds"], "bounds");
  if (doc.contains("obstacles")) {
    const json& obs = doc["obstacles"];
    if (!obs.is_array()) {
      fail_parse("obstacles: expected an array");
    }
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const std::string where = "obstacles[" + std::to_string(i) + "]";
      if (!obs[i].is_array()) {
        fail_parse(where + ": expected a vertex list");
      }
      Polygon poly;
      for (std::size_t k = 0; k < obs[i].size(); ++k) {
        poly.push_back(parse_point(obs[i][k], where + "[" + std::to_string(k) + "]"));
      }
      scene.obstacles.push_back(std::move(poly));
    }
  }
  scene.spawn_regions = parse_rects(doc, "spawn_regions");
  scene.goal_regions = parse_rects(doc, "goal_regions");
  validate_scene(scene);
  return scene;
}

std::string serialize_scene(const Scene& scene) {
  json doc;
  doc["format"] = kFormatTag;
  doc["name"] = scene.name;
  doc["bounds"] = rect_json(scene.bounds);
  json obs = json::array();
  for (const Polygon& poly : scene.obstacles) {
    json verts = json::array();
    for (const Vec2& v : poly) {
      verts.push_back(point_json(v));
    }
    obs.push_back(std::move(verts));
  }
  doc["obstacles"] = std::move(obs);
  json spawn = json::array();
  for (const Rect& r : scene.spawn_regions) {
    spawn.push_back(rect_json(r));
  }
  doc["spawn_regions"] = std::move(spawn);
  json goal = json::array();
  for (const Rect& r : scene.goal_regions) {
    goal.push_back(rect_json(r));
  }
  doc["goal_regions"] = std::move(goal);
  return doc.dump(2) + "\n";
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw SceneError(SceneError::Kind::Io, "cannot open scene file " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scene(buf.str());
}

void save_scene(const Scene& scene, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw SceneError(SceneError::Kind::Io, "cannot write scene file " + path.string());
  }
  out << serialize_scene(scene);
}

Vec2 closest_boundary_point(const Polygon& poly, const Vec2& p) {
  Vec2 best = poly.front();
  double best_sq = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 q = closest_point_on_segment(p, poly[i], poly[(i + 1) % poly.size()]);
    const double d = abs_sq(p - q);
    if (d < best_sq) {
      best_sq = d;
      best = q;
    }
  }
  return best;
}

double signed_distance(const Polygon& poly, const Vec2& p) {
  const double d = norm(p - closest_boundary_point(poly, p));
  bool inside = true;
  for (std::size_t i = 0; i < poly.size() && inside; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    inside = det(b - a, p - a) > 0.0;
  }
  return inside ? -d : d;
}

double signed_distance_to_bounds(const Rect& b, const Vec2& p) {
  return std::min({p.x - b.min.x, b.max.x - p.x, p.y - b.min.y, b.max.y - p.y});
}

double distance_to_nearest_obstacle(const Scene& scene, const Vec2& p) {
  double best = signed_distance_to_bounds(scene.bounds, p);
  for (const Polygon& poly : scene.obstacles) {
    best = std::min(best, signed_distance(poly, p));
  }
  return best;
}

Vec2 resolve_penetration(const Scene& scene, const Vec2& p, double radius) {
  constexpr int kMaxPasses = 16;
  constexpr double kSlack = 1e-12;
  Vec2 q = p;
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    bool moved = false;
    const Rect& b = scene.bounds;
    const double cx = std::clamp(q.x, b.min.x + radius, std::max(b.min.x + radius, b.max.x - radius));
    const double cy = std::clamp(q.y, b.min.y + radius, std::max(b.min.y + radius, b.max.y - radius));
    if (cx != q.x || cy != q.y) {
      q = {cx, cy};
      moved = true;
    }
    for (const Polygon& poly : scene.obstacles) {
      const double d = signed_distance(poly, q);
      if (d >= radius - kSlack) {
        continue;
      }
      const Vec2 c = closest_boundary_point(poly, q);
      Vec2 n;
      if (d > 0.0) {
        n = (q - c) / d;
      } else {
        // Center on or inside the polygon: leave through the nearest edge.
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < poly.size(); ++i) {
          const Vec2& e0 = poly[i];
          const Vec2& e1 = poly[(i + 1) % poly.size()];
          const double de = abs_sq(q - closest_point_on_segment(q, e0, e1));
          if (de < best) {
            best = de;
            n = outward_normal(e0, e1);
          }
        }
      }
      q = c + n * radius;
      moved = true;
    }
    if (!moved) {
      break;
    }
  }
  return q;
}

}  // namespace dynsim
