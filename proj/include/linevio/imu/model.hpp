#pragma once

#include <Eigen/Core>

#include "linevio/core/types.hpp"
#include "linevio/lie/so3.hpp"

namespace linevio {

/// One inertial measurement: body angular rate and specific force.
struct ImuSample {
  Timestamp t = 0;
  Vec3 gyro = Vec3::Zero();   // rad/s
  Vec3 accel = Vec3::Zero();  // m/s^2
};

/// Slowly varying additive sensor biases.
struct ImuBias {
  Vec3 bg = Vec3::Zero();
  Vec3 ba = Vec3::Zero();
};

/// Continuous-time noise densities of the IMU plus the gravity vector the
/// measurements are referred to.
struct NoiseParams {
  double sigma_g = 0.0;   // gyro white noise
  double sigma_a = 0.0;   // accel white noise
  double sigma_bg = 0.0;  // gyro bias random walk
  double sigma_ba = 0.0;  // accel bias random walk
  Vec3 gravity = Vec3(0.0, 0.0, -9.81);
};

/// Orientation, velocity, and position of the body in the world frame.
struct NavState {
  Mat3 R = Mat3::Identity();
  Vec3 v = Vec3::Zero();
  Vec3 p = Vec3::Zero();
};

/// Bias- and noise-corrected body-frame inputs.
struct ImuInput {
  Vec3 omega = Vec3::Zero();
  Vec3 accel = Vec3::Zero();
};

/// Steps between polar re-orthonormalizations of the propagated rotation;
/// keeps orthogonality drift below 1e-9 over millions of steps.
inline constexpr int kRenormInterval = 1000;

/// Removes bias (and, for sampled-noise callers, a white-noise draw) from a
/// raw measurement: omega = gyro - bg - n_g, accel = accel - ba - n_a.
inline ImuInput correctMeasurement(const ImuSample& s, const ImuBias& b,
                                   const Vec6& n = Vec6::Zero()) {
  return ImuInput{s.gyro - b.bg - n.head<3>(), s.accel - b.ba - n.tail<3>()};
}

/// One zero-order-hold propagation step:
///   R+ = R exp(omega dt),  a_w = R a_body + g,
///   v+ = v + a_w dt,       p+ = p + v dt + 1/2 a_w dt^2.
inline NavState propagateNav(const NavState& x, const Vec3& omega,
                             const Vec3& a_body, const Vec3& g, double dt) {
  const Vec3 a_w = x.R * a_body + g;
  NavState out;
  out.R = x.R * so3Exp(omega * dt);
  out.v = x.v + a_w * dt;
  out.p = x.p + x.v * dt + 0.5 * dt * dt * a_w;
  return out;
}

/// Bias random walk; the mean propagation uses n_b = 0.
inline ImuBias propagateBias(const ImuBias& b, const Vec6& n_b, double dt) {
  return ImuBias{b.bg + n_b.head<3>() * dt, b.ba + n_b.tail<3>() * dt};
}

}  // namespace linevio
