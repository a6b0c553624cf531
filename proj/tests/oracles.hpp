#pragma once

// Test-only reference implementations, kept independent of the library code
// paths they check.

#include <random>

#include <Eigen/Core>

#include "linevio/core/types.hpp"

namespace linevio::oracles {

/// Truncated power series exp(A) = sum A^k / k!, 20 terms.
inline MatX matrixExpSeries(const MatX& A, int terms = 20) {
  MatX result = MatX::Identity(A.rows(), A.cols());
  MatX term = MatX::Identity(A.rows(), A.cols());
  for (int k = 1; k <= terms; ++k) {
    term = (term * A) / static_cast<double>(k);
    result += term;
  }
  return result;
}

/// Embeds a SE_{2+2m}(3) tangent vector as the (5+2m)^2 algebra matrix
/// [ skew(xi_R)  xi_cols ; 0  0 ].
inline MatX embedTangent(const VecX& xi) {
  const int k = static_cast<int>(xi.size() - 3) / 3;
  MatX A = MatX::Zero(3 + k, 3 + k);
  const double x = xi(0), y = xi(1), z = xi(2);
  A(0, 1) = -z; A(0, 2) = y;
  A(1, 0) = z;  A(1, 2) = -x;
  A(2, 0) = -y; A(2, 1) = x;
  for (int i = 0; i < k; ++i) {
    A.block<3, 1>(0, 3 + i) = xi.segment<3>(3 + 3 * i);
  }
  return A;
}

inline Vec3 randomVec3(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> d(-scale, scale);
  return Vec3(d(rng), d(rng), d(rng));
}

/// Rotation vector with norm at most max_angle, uniformly random direction.
inline Vec3 randomRotationVec(std::mt19937_64& rng, double max_angle) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 axis(n(rng), n(rng), n(rng));
  axis.normalize();
  std::uniform_real_distribution<double> mag(0.0, max_angle);
  return axis * mag(rng);
}

/// Classic RK4 over [0, dt] for the rigid-body kinematics
///   Rdot = R skew(w(t)), vdot = R a(t) + g, pdot = v,
/// with time-varying body-frame inputs given by callables w(t), a(t).
template <typename FW, typename FA>
void rk4NavStep(Mat3& R, Vec3& v, Vec3& p, const FW& w, const FA& a,
                const Vec3& g, double t, double dt) {
  struct D {
    Mat3 dR;
    Vec3 dv, dp;
  };
  auto f = [&](const Mat3& Ri, const Vec3& vi, double ti) {
    Mat3 hat;
    const Vec3 wi = w(ti);
    hat << 0, -wi.z(), wi.y(), wi.z(), 0, -wi.x(), -wi.y(), wi.x(), 0;
    return D{Ri * hat, Ri * a(ti) + g, vi};
  };
  const D k1 = f(R, v, t);
  const D k2 = f(R + 0.5 * dt * k1.dR, v + 0.5 * dt * k1.dv, t + 0.5 * dt);
  const D k3 = f(R + 0.5 * dt * k2.dR, v + 0.5 * dt * k2.dv, t + 0.5 * dt);
  const D k4 = f(R + dt * k3.dR, v + dt * k3.dv, t + dt);
  R += dt / 6.0 * (k1.dR + 2 * k2.dR + 2 * k3.dR + k4.dR);
  v += dt / 6.0 * (k1.dv + 2 * k2.dv + 2 * k3.dv + k4.dv);
  p += dt / 6.0 * (k1.dp + 2 * k2.dp + 2 * k3.dp + k4.dp);
}

}  // namespace linevio::oracles
