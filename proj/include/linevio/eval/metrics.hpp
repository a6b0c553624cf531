#pragma once

#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "linevio/core/types.hpp"
#include "linevio/imu/model.hpp"
#include "linevio/io/formats.hpp"
#include "linevio/lie/sek3.hpp"
#include "linevio/lie/so3.hpp"

namespace linevio {

/// Indices of records sharing a timestamp, in estimate order.
inline std::vector<std::pair<size_t, size_t>> alignByTimestamp(
    const std::vector<TrajectoryRecord>& est,
    const std::vector<TrajectoryRecord>& gt) {
  std::unordered_map<Timestamp, size_t> gt_index;
  gt_index.reserve(gt.size());
  for (size_t i = 0; i < gt.size(); ++i) gt_index.emplace(gt[i].t, i);
  std::vector<std::pair<size_t, size_t>> pairs;
  for (size_t i = 0; i < est.size(); ++i) {
    const auto it = gt_index.find(est[i].t);
    if (it != gt_index.end()) pairs.emplace_back(i, it->second);
  }
  if (pairs.empty()) {
    throw std::invalid_argument(
        "trajectories share no timestamps; cannot evaluate");
  }
  return pairs;
}

/// Root-mean-square position error over matched timestamps.
inline double positionRmse(const std::vector<TrajectoryRecord>& est,
                           const std::vector<TrajectoryRecord>& gt) {
  const auto pairs = alignByTimestamp(est, gt);
  double sq = 0;
  for (const auto& [i, j] : pairs) sq += (est[i].p - gt[j].p).squaredNorm();
  return std::sqrt(sq / pairs.size());
}

/// Root-mean-square geodesic rotation angle over matched timestamps.
inline double attitudeRmse(const std::vector<TrajectoryRecord>& est,
                           const std::vector<TrajectoryRecord>& gt) {
  const auto pairs = alignByTimestamp(est, gt);
  double sq = 0;
  for (const auto& [i, j] : pairs) {
    sq += so3Log(gt[j].R.transpose() * est[i].R).squaredNorm();
  }
  return std::sqrt(sq / pairs.size());
}

/// Normalized estimation error squared of the 9-dof body state: the group
/// error e = log(chi_est chi_gt^{-1}) weighted by the body covariance block,
/// given as its lower-triangular square root. Consistent filters average to 9.
inline double bodyNees(const NavState& est, const NavState& gt,
                       const MatX& S_body) {
  if (S_body.rows() != 9 || S_body.cols() != 9) {
    throw std::invalid_argument("body covariance sqrt must be 9x9");
  }
  GroupState chi_est = GroupState::identity(0);
  chi_est.setRotation(est.R);
  chi_est.setVelocity(est.v);
  chi_est.setPosition(est.p);
  GroupState chi_gt = GroupState::identity(0);
  chi_gt.setRotation(gt.R);
  chi_gt.setVelocity(gt.v);
  chi_gt.setPosition(gt.p);
  const VecX e = groupLog(groupCompose(chi_est, groupInverse(chi_gt)));
  const VecX w = S_body.triangularView<Eigen::Lower>().solve(e);
  return w.squaredNorm();
}

}  // namespace linevio
