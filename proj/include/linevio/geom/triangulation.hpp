#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Core>

#include "linevio/core/types.hpp"
#include "linevio/geom/camera.hpp"
#include "linevio/geom/plucker.hpp"
#include "linevio/geom/pose.hpp"

namespace linevio {

/// Homogeneous plane coefficients (unit-handling left to callers).
using Plane = Vec4;

/// One camera observation of a line segment: camera-to-world pose and the
/// two detected pixel endpoints.
struct SegmentView {
  Pose T_WC;
  Vec2 a = Vec2::Zero();
  Vec2 b = Vec2::Zero();
};

/// Plane through the camera center and the two back-projected segment
/// endpoints, in world coordinates:
///   pi = [ (A - C) x (B - C) ; -C . (A x B) ].
inline Plane planeFromSegment(const CameraModel& cam, const SegmentView& view) {
  const Vec3 C = view.T_WC.t;
  const Vec3 A = view.T_WC * cam.backproject(view.a);
  const Vec3 B = view.T_WC * cam.backproject(view.b);
  const Vec3 normal = (A - C).cross(B - C);
  if (normal.norm() < 1e-12) {
    throw std::domain_error("planeFromSegment: degenerate segment");
  }
  Plane pi;
  pi.head<3>() = normal;
  pi.w() = -C.dot(A.cross(B));
  return pi;
}

/// Two-view line triangulation through the dual Plucker matrix
/// L* = pi1 pi2^T - pi2 pi1^T, reading v from the skew block and n from the
/// last column, returned with unit direction. Rejects plane pairs whose
/// normals are within min_angle_rad of parallel.
inline PluckerLine triangulateLine(const CameraModel& cam,
                                   const SegmentView& view1,
                                   const SegmentView& view2,
                                   double min_angle_rad = 1.0 * M_PI / 180.0) {
  const Plane pi1 = planeFromSegment(cam, view1);
  const Plane pi2 = planeFromSegment(cam, view2);

  const Vec3 n1 = pi1.head<3>().normalized();
  const Vec3 n2 = pi2.head<3>().normalized();
  const double cross = n1.cross(n2).norm();
  if (cross < std::sin(min_angle_rad)) {
    throw std::domain_error("triangulateLine: view planes nearly parallel");
  }

  const Mat4 dual = pi1 * pi2.transpose() - pi2 * pi1.transpose();
  PluckerLine line;
  line.n = dual.block<3, 1>(0, 3);
  const Mat3 vhat = 0.5 * (dual.topLeftCorner<3, 3>() -
                           dual.topLeftCorner<3, 3>().transpose());
  line.v = Vec3(vhat(2, 1), vhat(0, 2), vhat(1, 0));

  const double vnorm = line.v.norm();
  if (vnorm < 1e-12 * std::max(1.0, line.n.norm())) {
    throw std::domain_error("triangulateLine: direction vanished");
  }
  line.n /= vnorm;
  line.v /= vnorm;
  // nT v = 0 holds algebraically; strip the numerical remainder.
  line.n -= line.n.dot(line.v) * line.v;
  return line;
}

/// Closest point on the line (p0 + s u) to the ray (C + r d), r free.
/// Throws when the ray is parallel to the line.
inline Vec3 closestPointOnLineToRay(const Vec3& p0, const Vec3& u,
                                    const Vec3& C, const Vec3& d) {
  const double a = u.dot(u);
  const double b = u.dot(d);
  const double c = d.dot(d);
  const Vec3 w0 = p0 - C;
  const double denom = a * c - b * b;
  if (denom < 1e-12 * a * c) {
    throw std::domain_error("closestPointOnLineToRay: ray parallel to line");
  }
  const double s = (b * d.dot(w0) - c * u.dot(w0)) / denom;
  return p0 + s * u;
}

/// World endpoints for an infinite line: the points on the line closest to
/// the back-projected rays of the detected segment endpoints.
inline LineEndpoints endpointsFromPlucker(const CameraModel& cam,
                                          const PluckerLine& L,
                                          const SegmentView& view) {
  const double v2 = L.v.squaredNorm();
  if (v2 < 1e-24) {
    throw std::domain_error("endpointsFromPlucker: zero direction");
  }
  const Vec3 p0 = L.v.cross(L.n) / v2;  // closest line point to the origin
  const Vec3 u = L.v / std::sqrt(v2);
  const Vec3 C = view.T_WC.t;
  LineEndpoints out;
  out.ps = closestPointOnLineToRay(p0, u, C, view.T_WC.R * cam.backproject(view.a));
  out.pe = closestPointOnLineToRay(p0, u, C, view.T_WC.R * cam.backproject(view.b));
  return out;
}

/// Predicted one-sigma endpoint error of a two-view line triangulation,
/// found numerically: each independent error mode (segment shift and tilt by
/// sigma_px per view, camera center per axis by that view's position
/// uncertainty) is applied one at a time, and the per-mode endpoint
/// displacements accumulate in quadrature. Unlike a baseline/depth formula
/// this also exposes the degeneracy where the 3D line is nearly coplanar
/// with the baseline and the two view planes lose their intersection.
/// Returns +infinity when a perturbed pair degenerates outright.
inline double triangulationSensitivity(const CameraModel& cam,
                                       const SegmentView& view1,
                                       const SegmentView& view2,
                                       const LineEndpoints& ends,
                                       double sigma_px,
                                       double sigma_c1 = 0.0,
                                       double sigma_c2 = 0.0) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // Displacement for one perturbed pair; negative means degenerate.
  auto displacement = [&](const SegmentView& v1, const SegmentView& v2) {
    try {
      const LineEndpoints e =
          endpointsFromPlucker(cam, triangulateLine(cam, v1, v2), view2);
      return std::max((e.ps - ends.ps).norm(), (e.pe - ends.pe).norm());
    } catch (const std::domain_error&) {
      return -1.0;
    }
  };
  double var = 0.0;
  // One error mode: the +/- pair of a single perturbation direction.
  auto addMode = [&](int which, auto&& perturb) {
    double mode = 0.0;
    for (const double sign : {1.0, -1.0}) {
      SegmentView v = which == 0 ? view1 : view2;
      perturb(v, sign);
      const double d =
          which == 0 ? displacement(v, view2) : displacement(view1, v);
      if (d < 0.0) return false;
      if (d > mode) mode = d;
    }
    var += mode * mode;
    return true;
  };
  for (int which = 0; which < 2; ++which) {
    const SegmentView& base = which == 0 ? view1 : view2;
    const Vec2 dir = base.b - base.a;
    const double len = dir.norm();
    if (len < 1e-9) return kInf;
    const Vec2 normal(-dir.y() / len, dir.x() / len);
    const bool ok =
        addMode(which,
                [&](SegmentView& v, double sign) {
                  v.a += sign * sigma_px * normal;
                  v.b += sign * sigma_px * normal;
                }) &&
        addMode(which, [&](SegmentView& v, double sign) {
          v.a += sign * sigma_px * normal;
          v.b -= sign * sigma_px * normal;
        });
    if (!ok) return kInf;
    const double sigma_c = which == 0 ? sigma_c1 : sigma_c2;
    if (sigma_c <= 0.0) continue;
    for (int axis = 0; axis < 3; ++axis) {
      if (!addMode(which, [&](SegmentView& v, double sign) {
            v.T_WC.t(axis) += sign * sigma_c;
          })) {
        return kInf;
      }
    }
  }
  return std::sqrt(var);
}

}  // namespace linevio
