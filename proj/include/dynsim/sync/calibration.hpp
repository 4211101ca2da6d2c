// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <vector>

#include "dynsim/world/geometry.hpp"

namespace dynsim {

/// Row-major 3x3 matrix.
struct Mat3 {
  std::array<double, 9> m{1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0};

  static constexpr Mat3 identity() { return {}; }
  constexpr double operator()(int r, int c) const { return m[static_cast<std::size_t>(3 * r + c)]; }
  constexpr double& operator()(int r, int c) { return m[static_cast<std::size_t>(3 * r + c)]; }
  constexpr bool operator==(const Mat3&) const = default;
};

Mat3 operator*(const Mat3& a, const Mat3& b);
Vec3 operator*(const Mat3& a, const Vec3& v);
Mat3 transpose(const Mat3& a);
double determinant(const Mat3& a);
double frobenius_distance(const Mat3& a, const Mat3& b);

Mat3 matrix_from_quat(const Quat& q);
/// Canonical (w >= 0) quaternion of a rotation matrix.
Quat quat_from_matrix(const Mat3& r);

/// p_virtual = R * p_real + t. No scale term.
struct RigidTransform {
  Mat3 rotation;
  Vec3 translation;

  bool operator==(const RigidTransform&) const = default;
};

/// Throws std::invalid_argument unless R is orthonormal with det +1 (1e-9).
void validate_transform(const RigidTransform& x);

RigidTransform inverse(const RigidTransform& x);
/// a after b: compose(a, b)(p) == a(b(p)).
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
Vec3 apply_transform(const RigidTransform& x, const Vec3& p);
/// Position is mapped; orientation becomes quat(R) * q, renormalized, w >= 0.
Pose apply_transform(const RigidTransform& x, const Pose& p);

/// Rotation angle (rad) of a^T b, computed from the chord so that tiny
/// angles keep full precision.
double rotation_angle_between(const Mat3& a, const Mat3& b);

struct Correspondence {
  Vec3 real;
  Vec3 virt;
};

struct Calibration {
  RigidTransform transform;
  double residual_rms = 0.0;
};

/// Degenerate correspondence set. what() names the failed requirement.
class CalibrationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Least-squares rigid fit (Kabsch): centroids, SVD of the cross-covariance,
/// sign fix against reflections.
///
/// Needs at least 3 pairs whose real points are not collinear: the middle
/// eigenvalue of their covariance must exceed 1e-9 times the largest.
/// Coplanar sets are accepted.
Calibration estimate_calibration(std::span<const Correspondence> pairs);

}  // namespace dynsim
