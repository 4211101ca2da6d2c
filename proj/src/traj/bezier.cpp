// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "dynsim/traj/bezier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dynsim {
namespace {

Vec2 lerp(const Vec2& a, const Vec2& b, double t) { return a + (b - a) * t; }

double turn_between(const Vec2& a, const Vec2& b) {
  return std::fabs(std::atan2(det(a, b), dot(a, b)));
}

}  // namespace

SmoothResult smooth_waypoints(std::span<const Vec2> waypoints, double tension) {
  if (!(tension > 0.0 && tension < 1.0)) {
    throw std::invalid_argument("tension must lie in (0, 1)");
  }
  SmoothResult out;
  std::vector<Vec2> p;
  for (const Vec2& w : waypoints) {
    if (!is_finite(w)) {
      throw std::invalid_argument("waypoint is not finite");
    }
    if (!p.empty() && p.back() == w) {
      ++out.collapsed;
      continue;
    }
    p.push_back(w);
  }
  if (p.size() < 2) {
    throw std::invalid_argument("need at least 2 distinct waypoints");
  }

  const std::size_t n = p.size();
  std::vector<Vec2> m(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& prev = p[i == 0 ? 0 : i - 1];
    const Vec2& next = p[i + 1 == n ? n - 1 : i + 1];
    m[i] = (next - prev) * (0.5 * tension);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    out.path.segments.push_back(
        {p[i], p[i] + m[i] / 3.0, p[i + 1] - m[i + 1] / 3.0, p[i + 1]});
  }
  return out;
}

Vec2 eval_de_casteljau(const CubicSegment& s, double t) {
  const Vec2 a = lerp(s.p0, s.p1, t);
  const Vec2 b = lerp(s.p1, s.p2, t);
  const Vec2 c = lerp(s.p2, s.p3, t);
  const Vec2 d = lerp(a, b, t);
  const Vec2 e = lerp(b, c, t);
  return lerp(d, e, t);
}

Vec2 eval_bernstein(const CubicSegment& s, double t) {
  const double u = 1.0 - t;
  return s.p0 * (u * u * u) + s.p1 * (3.0 * u * u * t) + s.p2 * (3.0 * u * t * t) +
         s.p3 * (t * t * t);
}

Vec2 derivative(const CubicSegment& s, double t) {
  const double u = 1.0 - t;
  return (s.p1 - s.p0) * (3.0 * u * u) + (s.p2 - s.p1) * (6.0 * u * t) +
         (s.p3 - s.p2) * (3.0 * t * t);
}

bool is_c1(const CubicBezierPath& path, double tol) {
  for (std::size_t i = 0; i + 1 < path.segments.size(); ++i) {
    const CubicSegment& a = path.segments[i];
    const CubicSegment& b = path.segments[i + 1];
    if (norm(a.p3 - b.p0) > tol || norm((a.p3 - a.p2) - (b.p1 - b.p0)) > tol) {
      return false;
    }
  }
  return true;
}

SampledPath sample_path(const CubicBezierPath& path, const SampleOptions& options) {
  if (options.n_per_segment < 2) {
    throw std::invalid_argument("n_per_segment must be at least 2");
  }
  if (path.segments.empty()) {
    throw std::invalid_argument("path has no segments");
  }
  if (!(options.frame_dt > 0.0)) {
    throw std::invalid_argument("frame_dt must be positive");
  }
  const std::size_t n = options.n_per_segment;
  const std::size_t segs = path.segments.size();
  const std::size_t total = n + (segs - 1) * (n - 1);

  // Global parameter u in [0, segs]; segment index floor(u).
  std::vector<double> params(total);
  for (std::size_t k = 0; k < total; ++k) {
    params[k] = static_cast<double>(k) / static_cast<double>(n - 1);
  }
  params.back() = static_cast<double>(segs);

  if (options.arc_length) {
    // Dense cumulative chord-length table, inverted by linear interpolation.
    const std::size_t dense = 1024;
    std::vector<double> us{0.0};
    std::vector<double> len{0.0};
    Vec2 prev = path.segments.front().p0;
    for (std::size_t s = 0; s < segs; ++s) {
      for (std::size_t k = 1; k <= dense; ++k) {
        const double t = static_cast<double>(k) / dense;
        const Vec2 q = eval_de_casteljau(path.segments[s], t);
        len.push_back(len.back() + norm(q - prev));
        us.push_back(static_cast<double>(s) + t);
        prev = q;
      }
    }
    for (std::size_t k = 1; k + 1 < total; ++k) {
      const double target = len.back() * static_cast<double>(k) / static_cast<double>(total - 1);
      const auto it = std::lower_bound(len.begin(), len.end(), target);
      const std::size_t j = static_cast<std::size_t>(it - len.begin());
      const double span = len[j] - len[j - 1];
      const double f = span > 0.0 ? (target - len[j - 1]) / span : 0.0;
      params[k] = us[j - 1] + f * (us[j] - us[j - 1]);
    }
  }

  SampledPath out;
  out.trajectory.samples.reserve(total);
  out.headings.reserve(total);
  for (std::size_t k = 0; k < total; ++k) {
    std::size_t s = std::min(static_cast<std::size_t>(params[k]), segs - 1);
    double t = params[k] - static_cast<double>(s);
    if (!options.arc_length) {
      // Exact parameters: t = j / (n - 1) with shared ends.
      s = k == 0 ? 0 : std::min((k - 1) / (n - 1), segs - 1);
      const std::size_t j = k - s * (n - 1);
      t = static_cast<double>(j) / static_cast<double>(n - 1);
    }
    const CubicSegment& seg = path.segments[s];
    const Vec2 d = derivative(seg, t);
    out.trajectory.samples.push_back(
        {static_cast<double>(k) * options.frame_dt, eval_de_casteljau(seg, t)});
    out.headings.push_back(norm(d) > 0.0 ? normalized(d) : Vec2{});
  }
  return out;
}

double max_heading_change(std::span<const Vec2> headings) {
  double best = 0.0;
  const Vec2* prev = nullptr;
  for (const Vec2& h : headings) {
    if (h == Vec2{}) {
      continue;
    }
    if (prev != nullptr) {
      best = std::max(best, turn_between(*prev, h));
    }
    prev = &h;
  }
  return best;
}

double max_corner_turn(std::span<const Vec2> polyline) {
  double best = 0.0;
  for (std::size_t i = 1; i + 1 < polyline.size(); ++i) {
    const Vec2 a = polyline[i] - polyline[i - 1];
    const Vec2 b = polyline[i + 1] - polyline[i];
    if (norm(a) > 0.0 && norm(b) > 0.0) {
      best = std::max(best, turn_between(a, b));
    }
  }
  return best;
}

}  // namespace dynsim
