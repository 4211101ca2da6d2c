// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "dynsim/crowd/orca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

namespace dynsim {
namespace {

constexpr double kParallelEps = 1e-12;

// Shared construction for agent and static-point lines. `rel_pos` is the
// neighbor's position relative to self, `rel_vel` self's velocity relative
// to the neighbor.
OrcaLine line_from_relative(const Vec2& rel_pos, const Vec2& rel_vel, const Vec2& self_vel,
                            double combined_radius, double time_horizon, double dt,
                            double reciprocity, bool self_is_lower) {
  const double dist_sq = abs_sq(rel_pos);
  const double r = combined_radius;
  const double r_sq = r * r;

  OrcaLine line;
  Vec2 u;

  if (dist_sq > r_sq) {
    const double inv_tau = 1.0 / time_horizon;
    // From the truncation circle center to the relative velocity.
    const Vec2 w = rel_vel - rel_pos * inv_tau;
    const double w_len_sq = abs_sq(w);
    const double w_dot_p = dot(w, rel_pos);

    if (w_dot_p < 0.0 && w_dot_p * w_dot_p > r_sq * w_len_sq) {
      // Closest boundary point lies on the truncation arc.
      const double w_len = std::sqrt(w_len_sq);
      const Vec2 unit_w = w / w_len;
      line.direction = {unit_w.y, -unit_w.x};
      u = unit_w * (r * inv_tau - w_len);
    } else {
      const double leg = std::sqrt(dist_sq - r_sq);
      const double side = det(rel_pos, w);
      const bool left = side > 0.0 || (side == 0.0 && self_is_lower);
      if (left) {
        line.direction = Vec2{rel_pos.x * leg - rel_pos.y * r, rel_pos.x * r + rel_pos.y * leg} /
                         dist_sq;
      } else {
        line.direction = -Vec2{rel_pos.x * leg + rel_pos.y * r, -rel_pos.x * r + rel_pos.y * leg} /
                         dist_sq;
      }
      u = line.direction * dot(rel_vel, line.direction) - rel_vel;
    }
  } else {
    // Already overlapping: leave the collision within one step.
    const double inv_dt = 1.0 / dt;
    const Vec2 w = rel_vel - rel_pos * inv_dt;
    const double w_len = norm(w);
    Vec2 unit_w;
    if (w_len > 0.0) {
      unit_w = w / w_len;
    } else if (dist_sq > 0.0) {
      unit_w = -rel_pos / std::sqrt(dist_sq);
    } else {
      // Coincident centers: the lower agent treats the other as lying on +x.
      unit_w = self_is_lower ? Vec2{-1.0, 0.0} : Vec2{1.0, 0.0};
    }
    line.direction = {unit_w.y, -unit_w.x};
    u = unit_w * (r * inv_dt - w_len);
  }

  line.point = self_vel + u * reciprocity;
  return line;
}

// 1D program along line `line_no`, bounded by the earlier lines and the disc.
bool linear_program1(std::span<const OrcaLine> lines, std::size_t line_no, double radius,
                     const Vec2& opt_velocity, bool direction_opt, Vec2& result) {
  const OrcaLine& line = lines[line_no];
  const double dot_product = dot(line.point, line.direction);
  const double discriminant = dot_product * dot_product + radius * radius - abs_sq(line.point);

  if (discriminant < 0.0) {
    // The speed disc lies entirely on the infeasible side of this line.
    return false;
  }

  const double sqrt_discriminant = std::sqrt(discriminant);
  double t_left = -dot_product - sqrt_discriminant;
  double t_right = -dot_product + sqrt_discriminant;

  for (std::size_t i = 0; i < line_no; ++i) {
    const double denominator = det(line.direction, lines[i].direction);
    const double numerator = det(lines[i].direction, line.point - lines[i].point);

    if (std::fabs(denominator) <= kParallelEps) {
      if (numerator < 0.0) {
        return false;
      }
      continue;
    }

    const double t = numerator / denominator;
    if (denominator >= 0.0) {
      t_right = std::min(t_right, t);
    } else {
      t_left = std::max(t_left, t);
    }
    if (t_left > t_right) {
      return false;
    }
  }

  if (direction_opt) {
    result = dot(opt_velocity, line.direction) > 0.0 ? line.point + line.direction * t_right
                                                     : line.point + line.direction * t_left;
  } else {
    const double t = dot(line.direction, opt_velocity - line.point);
    result = line.point + line.direction * std::clamp(t, t_left, t_right);
  }
  return true;
}

// Returns lines.size() on success, otherwise the index of the failing line.
std::size_t linear_program2(std::span<const OrcaLine> lines, double radius,
                            const Vec2& opt_velocity, bool direction_opt, Vec2& result) {
  if (direction_opt) {
    // opt_velocity is a unit direction here.
    result = opt_velocity * radius;
  } else if (abs_sq(opt_velocity) > radius * radius) {
    result = normalized(opt_velocity) * radius;
  } else {
    result = opt_velocity;
  }

  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (violation(lines[i], result) > 0.0) {
      const Vec2 previous = result;
      if (!linear_program1(lines, i, radius, opt_velocity, direction_opt, result)) {
        result = previous;
        return i;
      }
    }
  }
  return lines.size();
}

// Minimizes the largest violation over lines [begin_line, n) while keeping
// the first static_count lines hard.
void linear_program3(std::span<const OrcaLine> lines, std::size_t static_count,
                     std::size_t begin_line, double radius, Vec2& result) {
  double distance = 0.0;

  for (std::size_t i = begin_line; i < lines.size(); ++i) {
    if (violation(lines[i], result) <= distance) {
      continue;
    }
    std::vector<OrcaLine> projected(lines.begin(),
                                    lines.begin() + static_cast<std::ptrdiff_t>(static_count));

    for (std::size_t j = static_count; j < i; ++j) {
      OrcaLine line;
      const double determinant = det(lines[i].direction, lines[j].direction);

      if (std::fabs(determinant) <= kParallelEps) {
        if (dot(lines[i].direction, lines[j].direction) > 0.0) {
          // Same orientation: line j never binds tighter than line i.
          continue;
        }
        line.point = (lines[i].point + lines[j].point) * 0.5;
      } else {
        line.point = lines[i].point +
                     lines[i].direction *
                         (det(lines[j].direction, lines[i].point - lines[j].point) / determinant);
      }
      line.direction = normalized(lines[j].direction - lines[i].direction);
      projected.push_back(line);
    }

    const Vec2 previous = result;
    const Vec2 push{-lines[i].direction.y, lines[i].direction.x};
    if (linear_program2(projected, radius, push, true, result) < projected.size()) {
      // Only reachable through rounding; the previous result is feasible by
      // construction.
      result = previous;
    }
    distance = violation(lines[i], result);
  }
}

}  // namespace

void validate_orca_params(const OrcaParams& p) {
  if (!(p.time_horizon_agents > 0.0) || !(p.time_horizon_obstacles > 0.0)) {
    throw std::invalid_argument("ORCA time horizons must be positive");
  }
  if (p.neighbor_limit < 1) {
    throw std::invalid_argument("ORCA neighbor_limit must be at least 1");
  }
  if (!(p.reciprocity > 0.0) || p.reciprocity > 1.0) {
    throw std::invalid_argument("ORCA reciprocity must lie in (0, 1]");
  }
}

std::vector<const Agent*> select_neighbors(const Agent& self, std::span<const Agent> agents,
                                           const OrcaParams& params) {
  const double range_sq = self.avoidance_radius * self.avoidance_radius;
  std::vector<std::pair<double, const Agent*>> found;
  for (const Agent& other : agents) {
    if (other.id == self.id) {
      continue;
    }
    const double d = abs_sq(other.position - self.position);
    if (d <= range_sq) {
      found.emplace_back(d, &other);
    }
  }
  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
    return std::tie(a.first, a.second->id) < std::tie(b.first, b.second->id);
  });
  if (found.size() > params.neighbor_limit) {
    found.resize(params.neighbor_limit);
  }
  std::vector<const Agent*> out;
  out.reserve(found.size());
  for (const auto& f : found) {
    out.push_back(f.second);
  }
  return out;
}

OrcaLine agent_line(const Agent& self, const Agent& other, double time_horizon, double dt,
                    double reciprocity, bool self_is_lower) {
  return line_from_relative(other.position - self.position, self.velocity - other.velocity,
                            self.velocity, self.radius + other.radius, time_horizon, dt,
                            reciprocity, self_is_lower);
}

OrcaLine static_obstacle_line(const Agent& self, const Vec2& nearest, bool inside,
                              double time_horizon, double dt) {
  const Vec2 offset = nearest - self.position;
  const double dist = norm(offset);
  // Unit vector pointing into the obstacle.
  Vec2 into = dist > 0.0 ? offset / dist : Vec2{1.0, 0.0};
  double clearance = dist - self.radius;
  if (inside) {
    into = -into;
    clearance = -dist - self.radius;
  }
  const double max_approach =
      clearance > 0.0 ? clearance / time_horizon : clearance / dt;
  // Feasible side: dot(into, v) <= max_approach.
  return {into * max_approach, {-into.y, into.x}};
}

OrcaConstraints orca_lines(const Agent& self, std::span<const Agent> neighbors, const Scene& scene,
                           const OrcaParams& params, double dt) {
  const std::vector<const Agent*> selected = select_neighbors(self, neighbors, params);
  return orca_lines(self, std::span<const Agent* const>(selected), scene, params, dt);
}

OrcaConstraints orca_lines(const Agent& self, std::span<const Agent* const> selected,
                           const Scene& scene, const OrcaParams& params, double dt) {
  OrcaConstraints out;
  const double range = params.time_horizon_obstacles * self.max_speed + self.radius;

  auto add_static = [&](const Vec2& nearest, double signed_dist) {
    if (signed_dist > range) {
      return;
    }
    out.lines.push_back(static_obstacle_line(self, nearest, signed_dist < 0.0,
                                             params.time_horizon_obstacles, dt));
  };

  for (const Polygon& poly : scene.obstacles) {
    add_static(closest_boundary_point(poly, self.position), signed_distance(poly, self.position));
  }
  const Rect& b = scene.bounds;
  const Vec2 corners[4] = {b.min, {b.max.x, b.min.y}, b.max, {b.min.x, b.max.y}};
  for (int k = 0; k < 4; ++k) {
    const Vec2 q = closest_point_on_segment(self.position, corners[k], corners[(k + 1) % 4]);
    const double d = norm(q - self.position);
    // Outside the bounds the wall is approached from its far side.
    add_static(q, b.contains(self.position) ? d : -d);
  }
  out.static_count = out.lines.size();

  for (const Agent* other : selected) {
    if (other->id == self.id) {
      continue;
    }
    out.lines.push_back(agent_line(self, *other, params.time_horizon_agents, dt,
                                   params.reciprocity, self.id < other->id));
  }
  return out;
}

Vec2 solve_velocity(std::span<const OrcaLine> lines, const Vec2& pref_velocity, double max_speed,
                    std::size_t static_count) {
  Vec2 result;
  const std::size_t fail = linear_program2(lines, max_speed, pref_velocity, false, result);
  if (fail < lines.size()) {
    linear_program3(lines, std::min(static_count, fail), fail, max_speed, result);
  }
  // Nearly antiparallel lines give far-off projected intersections; the
  // rounding there can leave the result a hair outside the speed disc.
  const double speed = norm(result);
  if (speed > max_speed) {
    result = result * (max_speed / speed);
  }
  return result;
}

}  // namespace dynsim
