#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "linevio/core/types.hpp"
#include "linevio/filter/lifecycle.hpp"
#include "linevio/geom/camera.hpp"
#include "linevio/geom/plucker.hpp"
#include "linevio/imu/model.hpp"
#include "linevio/io/formats.hpp"

namespace linevio {

enum class ScenarioKind { kCircle, kSinusoid3d, kHover };

inline ScenarioKind parseScenarioKind(const std::string& name) {
  if (name == "circle") return ScenarioKind::kCircle;
  if (name == "sinusoid-3d") return ScenarioKind::kSinusoid3d;
  if (name == "hover") return ScenarioKind::kHover;
  throw std::invalid_argument("unknown scenario '" + name +
                              "' (expected circle, sinusoid-3d, or hover)");
}

inline const char* scenarioKindName(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kCircle: return "circle";
    case ScenarioKind::kSinusoid3d: return "sinusoid-3d";
    case ScenarioKind::kHover: return "hover";
  }
  return "?";
}

/// The twelve edges of an 8 x 8 x 3 m room, the default landmark map.
inline std::vector<LineEndpoints> defaultLineMap() {
  const double s = 4.0, zt = 3.0;
  const Vec3 c[4] = {{s, s, 0}, {-s, s, 0}, {-s, -s, 0}, {s, -s, 0}};
  std::vector<LineEndpoints> edges;
  for (int i = 0; i < 4; ++i) {
    const Vec3& a = c[i];
    const Vec3& b = c[(i + 1) % 4];
    edges.push_back({a, b});                                        // floor
    edges.push_back({a + Vec3(0, 0, zt), b + Vec3(0, 0, zt)});      // ceiling
    edges.push_back({a, a + Vec3(0, 0, zt)});                       // corner
  }
  return edges;
}

/// VGA-class pinhole with the optical axis along body +x and a small
/// lever arm; columns of R are the camera axes in the body frame.
inline CameraModel defaultSimCamera() {
  CameraModel cam;
  cam.fu = 458.654;
  cam.fv = 457.296;
  cam.cu = 367.215;
  cam.cv = 248.375;
  cam.width = 752;
  cam.height = 480;
  Mat3 R;
  R << 0, 0, 1,
      -1, 0, 0,
       0, -1, 0;
  cam.T_IC = Pose{R, Vec3(0.05, 0.0, -0.02)};
  return cam;
}

/// Everything that defines one synthetic run.
struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::kCircle;
  double duration_s = 60.0;
  int imu_rate_hz = 200;
  int cam_rate_hz = 20;
  std::uint64_t seed = 1;
  NoiseParams noise;
  double sigma_px = 1.5;
  CameraModel camera = defaultSimCamera();
  std::vector<LineEndpoints> lines = defaultLineMap();
};

/// Exact state and body-frame inertial inputs at one instant.
struct TrajectorySample {
  Mat3 R = Mat3::Identity();
  Vec3 v = Vec3::Zero();
  Vec3 p = Vec3::Zero();
  Vec3 omega = Vec3::Zero();  // body angular rate
  Vec3 accel = Vec3::Zero();  // specific force R^T (a_world - g)
};

namespace detail {

inline Mat3 rotX(double a) {
  return Eigen::AngleAxisd(a, Vec3::UnitX()).toRotationMatrix();
}
inline Mat3 rotY(double a) {
  return Eigen::AngleAxisd(a, Vec3::UnitY()).toRotationMatrix();
}
inline Mat3 rotZ(double a) {
  return Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix();
}

inline Timestamp rateStepNs(int rate_hz, const char* what) {
  if (rate_hz <= 0 || 1000000000LL % rate_hz != 0) {
    throw std::invalid_argument(std::string(what) +
                                " must be positive and divide 1 GHz");
  }
  return 1000000000LL / rate_hz;
}

inline void validateRates(const ScenarioSpec& spec) {
  rateStepNs(spec.imu_rate_hz, "imu_rate_hz");
  rateStepNs(spec.cam_rate_hz, "cam_rate_hz");
  if (spec.imu_rate_hz % spec.cam_rate_hz != 0) {
    throw std::invalid_argument(
        "imu_rate_hz must be an integer multiple of cam_rate_hz");
  }
  if (spec.duration_s <= 0) {
    throw std::invalid_argument("duration_s must be positive");
  }
}

/// Liang-Barsky clip of segment a-b to [0,w] x [0,h]; false if fully outside.
inline bool clipSegmentToImage(Vec2& a, Vec2& b, double w, double h) {
  double t0 = 0.0, t1 = 1.0;
  const Vec2 d = b - a;
  const double p[4] = {-d.x(), d.x(), -d.y(), d.y()};
  const double q[4] = {a.x(), w - a.x(), a.y(), h - a.y()};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
    } else {
      const double r = q[i] / p[i];
      if (p[i] < 0.0) {
        t0 = std::max(t0, r);
      } else {
        t1 = std::min(t1, r);
      }
    }
  }
  if (t0 > t1) return false;
  const Vec2 na = a + t0 * d;
  const Vec2 nb = a + t1 * d;
  a = na;
  b = nb;
  return true;
}

}  // namespace detail

/// Closed-form trajectory of the chosen scenario; inputs are exact
/// derivatives of the returned state (verified against RK4 integration).
inline TrajectorySample sampleTrajectory(const ScenarioSpec& spec, double t) {
  TrajectorySample s;
  const Vec3 g = spec.noise.gravity;
  switch (spec.kind) {
    case ScenarioKind::kHover: {
      s.p = Vec3(0, 0, 1.5);
      s.accel = -g;  // R = I, zero world acceleration
      return s;
    }
    case ScenarioKind::kCircle: {
      // Constant-rate orbit, body x tangent to the path.
      const double r = 3.0, h = 1.5, period = 30.0;
      const double w = 2.0 * M_PI / period;
      const double th = w * t;
      s.p = Vec3(r * std::cos(th), r * std::sin(th), h);
      s.v = r * w * Vec3(-std::sin(th), std::cos(th), 0);
      const Vec3 a_world = -r * w * w * Vec3(std::cos(th), std::sin(th), 0);
      s.R = detail::rotZ(th + M_PI / 2.0);
      s.omega = Vec3(0, 0, w);
      s.accel = s.R.transpose() * (a_world - g);
      return s;
    }
    case ScenarioKind::kSinusoid3d: {
      // Lissajous translation with oscillating yaw/pitch/roll.
      const double ax = 1.2, ay = 0.9, az = 0.35, h = 1.5;
      const double wx = 2 * M_PI * 0.08, wy = 2 * M_PI * 0.11,
                   wz = 2 * M_PI * 0.17;
      s.p = Vec3(ax * std::sin(wx * t), ay * std::sin(wy * t),
                 h + az * std::sin(wz * t));
      s.v = Vec3(ax * wx * std::cos(wx * t), ay * wy * std::cos(wy * t),
                 az * wz * std::cos(wz * t));
      const Vec3 a_world(-ax * wx * wx * std::sin(wx * t),
                         -ay * wy * wy * std::sin(wy * t),
                         -az * wz * wz * std::sin(wz * t));

      const double apsi = 0.6, ath = 0.25, aphi = 0.2;
      const double wpsi = 2 * M_PI * 0.05, wth = 2 * M_PI * 0.09,
                   wphi = 2 * M_PI * 0.13;
      const double psi = apsi * std::sin(wpsi * t);
      const double th = ath * std::sin(wth * t);
      const double phi = aphi * std::sin(wphi * t);
      const double dpsi = apsi * wpsi * std::cos(wpsi * t);
      const double dth = ath * wth * std::cos(wth * t);
      const double dphi = aphi * wphi * std::cos(wphi * t);

      const Mat3 Rx = detail::rotX(phi);
      const Mat3 Ry = detail::rotY(th);
      s.R = detail::rotZ(psi) * Ry * Rx;
      // Euler-rate kinematics of R = Rz Ry Rx with Rdot = R skew(omega):
      s.omega = Vec3(dphi, 0, 0) + Rx.transpose() * Vec3(0, dth, 0) +
                Rx.transpose() * Ry.transpose() * Vec3(0, 0, dpsi);
      s.accel = s.R.transpose() * (a_world - g);
      return s;
    }
  }
  throw std::logic_error("unreachable scenario kind");
}

/// Ideal inertial inputs corrupted by discrete white noise (density / sqrt(dt))
/// and integrated bias random walks, all drawn from the scenario seed.
inline std::vector<ImuSample> synthesizeImu(const ScenarioSpec& spec) {
  detail::validateRates(spec);
  const Timestamp step = detail::rateStepNs(spec.imu_rate_hz, "imu_rate_hz");
  const double dt = 1.0 / spec.imu_rate_hz;
  const double sqrt_dt = std::sqrt(dt);
  const long n = std::lround(spec.duration_s * spec.imu_rate_hz);

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ImuBias bias;

  std::vector<ImuSample> out;
  out.reserve(n + 1);
  for (long k = 0; k <= n; ++k) {
    const TrajectorySample ideal = sampleTrajectory(spec, k * dt);
    ImuSample s;
    s.t = k * step;
    for (int i = 0; i < 3; ++i) {
      s.gyro(i) = ideal.omega(i) + bias.bg(i) +
                  spec.noise.sigma_g / sqrt_dt * gauss(rng);
    }
    for (int i = 0; i < 3; ++i) {
      s.accel(i) = ideal.accel(i) + bias.ba(i) +
                   spec.noise.sigma_a / sqrt_dt * gauss(rng);
    }
    for (int i = 0; i < 3; ++i) {
      bias.bg(i) += spec.noise.sigma_bg * sqrt_dt * gauss(rng);
    }
    for (int i = 0; i < 3; ++i) {
      bias.ba(i) += spec.noise.sigma_ba * sqrt_dt * gauss(rng);
    }
    out.push_back(s);
  }
  return out;
}

/// Projects the map into every camera frame: segments behind the camera are
/// omitted, the rest are clipped to the image and perturbed per endpoint
/// coordinate with sigma_px noise. Clipping uses a 4-sigma inset so the noise
/// stays untruncated Gaussian on every emitted endpoint. Track ids equal map
/// indices.
inline std::vector<LineTrack> synthesizeTracks(const ScenarioSpec& spec) {
  detail::validateRates(spec);
  const Timestamp step = detail::rateStepNs(spec.cam_rate_hz, "cam_rate_hz");
  const double dt = 1.0 / spec.cam_rate_hz;
  const long n = std::lround(spec.duration_s * spec.cam_rate_hz);
  const double kNearPlane = 0.05;
  const double kMinLengthPx = 1.0;
  const double margin = 4.0 * spec.sigma_px;
  if (2 * margin + kMinLengthPx >= spec.camera.width ||
      2 * margin + kMinLengthPx >= spec.camera.height) {
    throw std::invalid_argument("sigma_px too large for the image size");
  }

  // decoupled stream so IMU noise draws do not shift with the map size
  std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<LineTrack> out;
  for (long k = 0; k <= n; ++k) {
    const TrajectorySample s = sampleTrajectory(spec, k * dt);
    const Pose T_WC = Pose{s.R, s.p} * spec.camera.T_IC;
    const Pose T_CW = T_WC.inverse();
    for (size_t id = 0; id < spec.lines.size(); ++id) {
      const Vec3 pa = T_CW * spec.lines[id].ps;
      const Vec3 pb = T_CW * spec.lines[id].pe;
      if (pa.z() < kNearPlane || pb.z() < kNearPlane) continue;
      Vec2 a = spec.camera.projectPoint(pa) - Vec2(margin, margin);
      Vec2 b = spec.camera.projectPoint(pb) - Vec2(margin, margin);
      if (!detail::clipSegmentToImage(a, b, spec.camera.width - 2 * margin,
                                      spec.camera.height - 2 * margin)) {
        continue;
      }
      if ((b - a).norm() < kMinLengthPx) continue;
      for (Vec2* px : {&a, &b}) {
        px->x() = std::clamp(px->x() + margin + spec.sigma_px * gauss(rng),
                             0.0, double(spec.camera.width));
        px->y() = std::clamp(px->y() + margin + spec.sigma_px * gauss(rng),
                             0.0, double(spec.camera.height));
      }
      if (a == b) continue;
      LineTrack t;
      t.t = k * step;
      t.id = static_cast<std::int64_t>(id);
      t.a = a;
      t.b = b;
      out.push_back(t);
    }
  }
  return out;
}

/// Exact poses and velocities at the camera timestamps.
inline std::vector<TrajectoryRecord> groundTruth(const ScenarioSpec& spec) {
  detail::validateRates(spec);
  const Timestamp step = detail::rateStepNs(spec.cam_rate_hz, "cam_rate_hz");
  const double dt = 1.0 / spec.cam_rate_hz;
  const long n = std::lround(spec.duration_s * spec.cam_rate_hz);
  std::vector<TrajectoryRecord> out;
  out.reserve(n + 1);
  for (long k = 0; k <= n; ++k) {
    const TrajectorySample s = sampleTrajectory(spec, k * dt);
    out.push_back(TrajectoryRecord{k * step, s.p, s.R, s.v});
  }
  return out;
}

}  // namespace linevio
