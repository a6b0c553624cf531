#pragma once

#include <Eigen/Core>

#include "linevio/core/types.hpp"

namespace linevio {

/// Rigid transform (R, t): x_out = R * x_in + t.
struct Pose {
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();

  Vec3 operator*(const Vec3& x) const { return R * x + t; }

  Pose operator*(const Pose& other) const {
    return Pose{R * other.R, R * other.t + t};
  }

  Pose inverse() const { return Pose{R.transpose(), -(R.transpose() * t)}; }
};

}  // namespace linevio
