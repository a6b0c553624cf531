#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "linevio/core/types.hpp"

namespace linevio {

// Rotation-vector magnitude below which trigonometric coefficient ratios
// switch to their 2nd-order Taylor expansions.
inline constexpr double kSmallAngle = 1e-6;

// Rotation angles within this distance of pi are rejected by the logarithm.
inline constexpr double kLogAngleMargin = 1e-6;

/// Skew-symmetric matrix such that skew(a) * b = a x b.
inline Mat3 skew(const Vec3& v) {
  Mat3 s;
  // clang-format off
  s <<     0, -v.z(),  v.y(),
       v.z(),      0, -v.x(),
      -v.y(),  v.x(),      0;
  // clang-format on
  return s;
}

inline Vec3 unskew(const Mat3& m) {
  return Vec3(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1)) * 0.5;
}

/// Rodrigues formula. Total function; Taylor coefficients below kSmallAngle.
inline Mat3 so3Exp(const Vec3& phi) {
  const double theta2 = phi.squaredNorm();
  const Mat3 hat = skew(phi);
  double a, b;  // sin(t)/t, (1-cos(t))/t^2
  if (theta2 < kSmallAngle * kSmallAngle) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    const double theta = std::sqrt(theta2);
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  return Mat3::Identity() + a * hat + b * hat * hat;
}

/// Inverse of so3Exp via the quaternion form, which stays accurate for
/// angles approaching pi. Throws std::domain_error within kLogAngleMargin
/// of the pi singularity.
inline Vec3 so3Log(const Mat3& R) {
  Eigen::Quaterniond q(R);
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const Vec3 v = q.vec();
  const double s = v.norm();
  const double theta = 2.0 * std::atan2(s, q.w());
  if (theta >= M_PI - kLogAngleMargin) {
    throw std::domain_error("so3Log: rotation angle within margin of pi");
  }
  if (s < 1e-9) {
    // theta/sin(theta/2) ~ 2/w * (1 - s^2/(3 w^2)) for s -> 0
    return v * (2.0 / q.w()) * (1.0 - s * s / (3.0 * q.w() * q.w()));
  }
  return v * (theta / s);
}

/// Left Jacobian J_l(phi) = I + (1-cos t)/t^2 hat + (t-sin t)/t^3 hat^2.
inline Mat3 so3LeftJacobian(const Vec3& phi) {
  const double theta2 = phi.squaredNorm();
  const Mat3 hat = skew(phi);
  double b, c;  // (1-cos t)/t^2, (t-sin t)/t^3
  if (theta2 < kSmallAngle * kSmallAngle) {
    b = 0.5 - theta2 / 24.0;
    c = 1.0 / 6.0 - theta2 / 120.0;
  } else {
    const double theta = std::sqrt(theta2);
    b = (1.0 - std::cos(theta)) / theta2;
    c = (theta - std::sin(theta)) / (theta2 * theta);
  }
  return Mat3::Identity() + b * hat + c * hat * hat;
}

/// Nearest rotation matrix in Frobenius norm (polar projection).
inline Mat3 orthonormalized(const Mat3& R) {
  Eigen::JacobiSVD<Mat3> svd(R, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 out = svd.matrixU() * svd.matrixV().transpose();
  if (out.determinant() < 0.0) {
    Mat3 flip = Mat3::Identity();
    flip(2, 2) = -1.0;
    out = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return out;
}

inline bool isRotation(const Mat3& R, double tol = 1e-9) {
  return (R.transpose() * R - Mat3::Identity()).norm() < tol &&
         std::abs(R.determinant() - 1.0) < tol;
}

}  // namespace linevio
