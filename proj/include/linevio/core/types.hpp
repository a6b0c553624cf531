#pragma once

#include <Eigen/Core>
#include <cstdint>

namespace linevio {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using VecX = Eigen::VectorXd;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using MatX = Eigen::MatrixXd;
using Mat3X = Eigen::Matrix<double, 3, Eigen::Dynamic>;

// Timestamps are integer nanoseconds end to end; floating seconds only
// inside computation.
using Timestamp = std::int64_t;

inline double toSeconds(Timestamp t) { return static_cast<double>(t) * 1e-9; }

}  // namespace linevio
