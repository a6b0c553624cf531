#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Core>

#include "linevio/core/types.hpp"
#include "linevio/geom/camera.hpp"
#include "linevio/geom/pose.hpp"
#include "linevio/lie/so3.hpp"

namespace linevio {

/// Plucker coordinates of a 3D line: moment n (normal of the plane spanned
/// by the line and the origin) and direction v, with n . v = 0.
struct PluckerLine {
  Vec3 n = Vec3::Zero();
  Vec3 v = Vec3::Zero();

  double constraintResidual() const { return std::abs(n.dot(v)); }
};

/// Homogeneous image-line coefficients (L1, L2, L3).
using ImageLine = Vec3;

/// World-frame 3D segment endpoints.
struct LineEndpoints {
  Vec3 ps = Vec3::Zero();
  Vec3 pe = Vec3::Zero();
};

/// Line through two homogeneous points: n = p1 x p2, v = w1 p2 - w2 p1.
inline PluckerLine pluckerFromPoints(const Vec4& p1, const Vec4& p2) {
  PluckerLine line;
  line.n = p1.head<3>().cross(p2.head<3>());
  line.v = p1.w() * p2.head<3>() - p2.w() * p1.head<3>();
  const double scale = p1.norm() * p2.norm();
  if (line.n.norm() + line.v.norm() < 1e-12 * std::max(scale, 1.0)) {
    throw std::domain_error("pluckerFromPoints: points projectively equal");
  }
  return line;
}

/// Euclidean two-point construction with unit homogeneous weights.
inline PluckerLine pluckerFromEndpoints(const Vec3& ps, const Vec3& pe) {
  return pluckerFromPoints(Vec4(ps.x(), ps.y(), ps.z(), 1.0),
                           Vec4(pe.x(), pe.y(), pe.z(), 1.0));
}

/// Frame change n' = R n + skew(t) R v, v' = R v. Preserves the Plucker
/// constraint.
inline PluckerLine transformPlucker(const Pose& T, const PluckerLine& L) {
  PluckerLine out;
  out.v = T.R * L.v;
  out.n = T.R * L.n + T.t.cross(out.v);
  return out;
}

/// Image line of a camera-frame Plucker line; only the moment enters.
inline ImageLine projectPlucker(const CameraModel& cam,
                                const PluckerLine& Lc) {
  if (Lc.n.norm() < 1e-12 * std::max(1.0, Lc.v.norm())) {
    throw std::domain_error("projectPlucker: line through camera center");
  }
  return cam.lineProjectionMatrix() * Lc.n;
}

/// Signed orthogonal distances (px) from the two detected endpoints to an
/// image line: d_k = l . (s_k, 1) / sqrt(L1^2 + L2^2).
inline Vec2 lineResidual(const ImageLine& l, const Vec2& ss, const Vec2& se) {
  const double norm = std::hypot(l.x(), l.y());
  if (norm < 1e-15) {
    throw std::domain_error("lineResidual: line at infinity");
  }
  return Vec2(l.x() * ss.x() + l.y() * ss.y() + l.z(),
              l.x() * se.x() + l.y() * se.y() + l.z()) /
         norm;
}

}  // namespace linevio
