#pragma once

#include <stdexcept>

#include <Eigen/Core>

#include "linevio/core/types.hpp"
#include "linevio/geom/pose.hpp"

namespace linevio {

/// Pinhole camera with fixed extrinsic T_IC (camera frame to IMU frame).
/// Pixels are assumed undistorted.
struct CameraModel {
  double fu = 0.0, fv = 0.0;
  double cu = 0.0, cv = 0.0;
  int width = 0, height = 0;
  Pose T_IC;

  /// Normalized image-plane point (x, y, 1) for a pixel.
  Vec3 backproject(const Vec2& px) const {
    return Vec3((px.x() - cu) / fu, (px.y() - cv) / fv, 1.0);
  }

  /// Pinhole projection of a camera-frame point with positive depth.
  Vec2 projectPoint(const Vec3& pc) const {
    if (pc.z() <= 0.0) {
      throw std::domain_error("CameraModel::projectPoint: non-positive depth");
    }
    return Vec2(fu * pc.x() / pc.z() + cu, fv * pc.y() / pc.z() + cv);
  }

  /// Projection matrix mapping a camera-frame line moment to homogeneous
  /// image-line coefficients:
  ///   [ fv        0      0     ]
  ///   [ 0         fu     0     ]
  ///   [ -fv cu   -fu cv  fu fv ]
  Mat3 lineProjectionMatrix() const {
    Mat3 K;
    // clang-format off
    K <<       fv,        0.0,     0.0,
              0.0,         fu,     0.0,
         -fv * cu,   -fu * cv, fu * fv;
    // clang-format on
    return K;
  }
};

}  // namespace linevio
