// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "dynsim/sync/calibration.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

namespace dynsim {
namespace {

constexpr double kOrthoTol = 1e-9;
constexpr double kCollinearRatio = 1e-9;

Eigen::Vector3d to_eigen(const Vec3& v) { return {v.x, v.y, v.z}; }

}  // namespace

Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 r;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      r(i, j) = a(i, 0) * b(0, j) + a(i, 1) * b(1, j) + a(i, 2) * b(2, j);
    }
  }
  return r;
}

Vec3 operator*(const Mat3& a, const Vec3& v) {
  return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z,
          a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z,
          a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z};
}

Mat3 transpose(const Mat3& a) {
  Mat3 r;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      r(i, j) = a(j, i);
    }
  }
  return r;
}

double determinant(const Mat3& a) {
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
         a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

double frobenius_distance(const Mat3& a, const Mat3& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < 9; ++i) {
    const double d = a.m[i] - b.m[i];
    s += d * d;
  }
  return std::sqrt(s);
}

Mat3 matrix_from_quat(const Quat& q0) {
  const Quat q = canonical(q0);
  const double w = q.w, x = q.x, y = q.y, z = q.z;
  Mat3 r;
  r(0, 0) = 1.0 - 2.0 * (y * y + z * z);
  r(0, 1) = 2.0 * (x * y - w * z);
  r(0, 2) = 2.0 * (x * z + w * y);
  r(1, 0) = 2.0 * (x * y + w * z);
  r(1, 1) = 1.0 - 2.0 * (x * x + z * z);
  r(1, 2) = 2.0 * (y * z - w * x);
  r(2, 0) = 2.0 * (x * z - w * y);
  r(2, 1) = 2.0 * (y * z + w * x);
  r(2, 2) = 1.0 - 2.0 * (x * x + y * y);
  return r;
}

Quat quat_from_matrix(const Mat3& r) {
  // Shepperd: branch on the largest diagonal term for stability.
  const double tr = r(0, 0) + r(1, 1) + r(2, 2);
  Quat q;
  if (tr >= r(0, 0) && tr >= r(1, 1) && tr >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + tr);
    q = {0.25 * s, (r(2, 1) - r(1, 2)) / s, (r(0, 2) - r(2, 0)) / s, (r(1, 0) - r(0, 1)) / s};
  } else if (r(0, 0) >= r(1, 1) && r(0, 0) >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2));
    q = {(r(2, 1) - r(1, 2)) / s, 0.25 * s, (r(0, 1) + r(1, 0)) / s, (r(0, 2) + r(2, 0)) / s};
  } else if (r(1, 1) >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2));
    q = {(r(0, 2) - r(2, 0)) / s, (r(0, 1) + r(1, 0)) / s, 0.25 * s, (r(1, 2) + r(2, 1)) / s};
  } else {
    const double s = 2.0 * std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1));
    q = {(r(1, 0) - r(0, 1)) / s, (r(0, 2) + r(2, 0)) / s, (r(1, 2) + r(2, 1)) / s, 0.25 * s};
  }
  return canonical(q);
}

void validate_transform(const RigidTransform& x) {
  if (frobenius_distance(transpose(x.rotation) * x.rotation, Mat3::identity()) > kOrthoTol) {
    throw std::invalid_argument("rotation is not orthonormal");
  }
  if (std::fabs(determinant(x.rotation) - 1.0) > kOrthoTol) {
    throw std::invalid_argument("rotation determinant is not +1");
  }
  if (!is_finite(x.translation)) {
    throw std::invalid_argument("translation is not finite");
  }
}

RigidTransform inverse(const RigidTransform& x) {
  const Mat3 rt = transpose(x.rotation);
  return {rt, -(rt * x.translation)};
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

Vec3 apply_transform(const RigidTransform& x, const Vec3& p) {
  return x.rotation * p + x.translation;
}

Pose apply_transform(const RigidTransform& x, const Pose& p) {
  return {apply_transform(x, p.position),
          canonical(quat_from_matrix(x.rotation) * p.orientation)};
}

double rotation_angle_between(const Mat3& a, const Mat3& b) {
  // ||a - b||_F = 2 sqrt(2) sin(theta / 2) for rotations.
  const double chord = frobenius_distance(a, b) / (2.0 * std::sqrt(2.0));
  return 2.0 * std::asin(std::min(1.0, chord));
}

Calibration estimate_calibration(std::span<const Correspondence> pairs) {
  if (pairs.size() < 3) {
    throw CalibrationError("need at least 3 correspondences, got " +
                           std::to_string(pairs.size()));
  }
  Eigen::Vector3d cr = Eigen::Vector3d::Zero();
  Eigen::Vector3d cv = Eigen::Vector3d::Zero();
  for (const Correspondence& c : pairs) {
    if (!is_finite(c.real) || !is_finite(c.virt)) {
      throw CalibrationError("correspondence contains a non-finite coordinate");
    }
    cr += to_eigen(c.real);
    cv += to_eigen(c.virt);
  }
  const double n = static_cast<double>(pairs.size());
  cr /= n;
  cv /= n;

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (const Correspondence& c : pairs) {
    const Eigen::Vector3d a = to_eigen(c.real) - cr;
    const Eigen::Vector3d b = to_eigen(c.virt) - cv;
    cov += a * a.transpose();
    h += a * b.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  const Eigen::Vector3d ev = eig.eigenvalues();  // ascending
  if (!(ev(2) > 0.0) || ev(1) <= kCollinearRatio * ev(2)) {
    throw CalibrationError("real points are collinear");
  }

  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d v = svd.matrixV();
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  const Eigen::Matrix3d r = v * d * u.transpose();
  const Eigen::Vector3d t = cv - r * cr;

  Calibration out;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      out.transform.rotation(i, j) = r(i, j);
    }
  }
  out.transform.translation = {t(0), t(1), t(2)};
  double sq = 0.0;
  for (const Correspondence& c : pairs) {
    const Vec3 e = apply_transform(out.transform, c.real) - c.virt;
    sq += dot(e, e);
  }
  out.residual_rms = std::sqrt(sq / n);
  return out;
}

}  // namespace dynsim
