#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "linevio/filter/cubature.hpp"
#include "linevio/filter/state.hpp"
#include "linevio/geom/camera.hpp"
#include "linevio/geom/plucker.hpp"
#include "linevio/imu/model.hpp"

namespace linevio {

/// Sqrt of the per-sample input-noise covariance for a zero-order-hold step:
/// averaging continuous white noise over dt scales the density by 1/sqrt(dt).
inline MatX inputNoiseSqrt(const NoiseParams& noise, double dt) {
  Vec6 d;
  const double s = 1.0 / std::sqrt(dt);
  d << noise.sigma_g * s, noise.sigma_g * s, noise.sigma_g * s,
      noise.sigma_a * s, noise.sigma_a * s, noise.sigma_a * s;
  return MatX(d.asDiagonal());
}

/// Propagation points: state sqrt augmented with the 6x6 input-noise sqrt,
/// 2(6m+21) points in total.
inline std::vector<CubaturePoint> buildPropagationPoints(
    const FilterState& fs, const MatX& S_u) {
  if (S_u.rows() != 6 || S_u.cols() != 6) {
    throw std::invalid_argument("buildPropagationPoints: S_u must be 6x6");
  }
  const int n = fs.dim();
  MatX S_aug = MatX::Zero(n + 6, n + 6);
  S_aug.topLeftCorner(n, n) = fs.S;
  S_aug.bottomRightCorner(6, 6) = S_u;
  return materializePoints(fs, cubatureGenerators(S_aug));
}

/// Update points: state sqrt augmented with the pixel-noise sqrt for
/// observed_lines line measurements (2 residual rows each), 2(8m+15) points
/// when every state line is observed.
inline std::vector<CubaturePoint> buildUpdatePoints(const FilterState& fs,
                                                    double sigma_px,
                                                    int observed_lines) {
  const int n = fs.dim();
  const int noise_dim = 2 * observed_lines;
  MatX S_aug = MatX::Zero(n + noise_dim, n + noise_dim);
  S_aug.topLeftCorner(n, n) = fs.S;
  S_aug.bottomRightCorner(noise_dim, noise_dim) =
      sigma_px * MatX::Identity(noise_dim, noise_dim);
  return materializePoints(fs, cubatureGenerators(S_aug));
}

/// One filter prediction step: pushes the cubature points through the IMU
/// model, rebuilds the mean from a noise-free pass, and re-factors the sqrt
/// covariance by QR with the bias random-walk block appended.
inline FilterState propagate(const FilterState& fs, const ImuSample& u,
                             double dt, const NoiseParams& noise) {
  if (dt <= 0.0) {
    throw std::invalid_argument("propagate: dt must be positive");
  }
  const int m = fs.numLines();
  const int n = fs.dim();
  const int group_dim = kBodyDim + kLineDim * m;
  const int aug_dim = n + 6;

  std::vector<CubaturePoint> points =
      buildPropagationPoints(fs, inputNoiseSqrt(noise, dt));
  for (CubaturePoint& pt : points) {
    const ImuInput in = correctMeasurement(u, pt.bias, pt.noise);
    const NavState nav = propagateNav(
        NavState{pt.chi.rotation(), pt.chi.velocity(), pt.chi.position()},
        in.omega, in.accel, noise.gravity, dt);
    pt.chi.setRotation(nav.R);
    pt.chi.setVelocity(nav.v);
    pt.chi.setPosition(nav.p);
  }

  FilterState out = fs;
  {
    const ImuInput in = correctMeasurement(u, fs.bias);
    const NavState nav = propagateNav(
        NavState{fs.chi.rotation(), fs.chi.velocity(), fs.chi.position()},
        in.omega, in.accel, noise.gravity, dt);
    out.chi.setRotation(nav.R);
    out.chi.setVelocity(nav.v);
    out.chi.setPosition(nav.p);
  }

  const GroupState mean_inv = groupInverse(out.chi);
  const double w = 1.0 / std::sqrt(2.0 * aug_dim);
  MatX cols = MatX::Zero(n, 2 * aug_dim + 6);
  for (int j = 0; j < 2 * aug_dim; ++j) {
    cols.col(j).head(group_dim) =
        w * groupLog(groupCompose(points[j].chi, mean_inv));
    cols.col(j).segment<3>(group_dim) = w * (points[j].bias.bg - out.bias.bg);
    cols.col(j).segment<3>(group_dim + 3) =
        w * (points[j].bias.ba - out.bias.ba);
  }
  // Bias random walk enters additively, sqrt sigma_b * sqrt(dt).
  const double sdt = std::sqrt(dt);
  for (int i = 0; i < 3; ++i) {
    cols(group_dim + i, 2 * aug_dim + i) = noise.sigma_bg * sdt;
    cols(group_dim + 3 + i, 2 * aug_dim + 3 + i) = noise.sigma_ba * sdt;
  }
  out.S = sqrtFactorFromColumns(cols);
  return out;
}

/// One detected segment matched to a tracked state line.
struct LineObservation {
  std::int64_t id = 0;
  Vec2 ss = Vec2::Zero();
  Vec2 se = Vec2::Zero();
};

/// All line measurements of one camera frame.
struct MeasurementBatch {
  std::vector<LineObservation> lines;
  double sigma_px = 1.5;
};

/// Image line predicted for state line i through the body pose and the
/// camera extrinsic. Throws std::domain_error on degenerate projection.
inline ImageLine predictImageLine(const GroupState& chi, int i,
                                  const CameraModel& cam) {
  const Pose T_WI{chi.rotation(), chi.position()};
  const Pose T_CW = (T_WI * cam.T_IC).inverse();
  const PluckerLine Lw = pluckerFromEndpoints(chi.lineStart(i),
                                              chi.lineEnd(i));
  return projectPlucker(cam, transformPlucker(T_CW, Lw));
}

/// Result of an update attempt. `state` is the posterior when applied and
/// the untouched prior otherwise.
struct UpdateOutcome {
  FilterState state;
  bool applied = false;
  int lines_used = 0;
  int lines_gated = 0;
  int lines_degenerate = 0;
  MatX S_z;
  VecX innovation;
  std::string note;
};

namespace detail {

/// Shared update algebra: gain from triangular solves, mean correction on
/// the group, posterior sqrt via QR of the gain-corrected deviations plus
/// the K S_noise block. Optional chi-square gating on consecutive 2-row
/// (per-line) residual blocks.
inline UpdateOutcome applyUpdateCore(const FilterState& fs, VecX zbar,
                                     MatX devs, const MatX& state_devs,
                                     double sigma_noise, double gate_chi2) {
  UpdateOutcome out;
  out.state = fs;
  if (!zbar.allFinite() || !devs.allFinite()) {
    throw std::runtime_error("update: non-finite measurement moments");
  }

  const int n = fs.dim();
  auto innovationSqrt = [&](const VecX& z, const MatX& e) {
    const int zd = static_cast<int>(z.size());
    MatX cols(zd, e.cols() + zd);
    cols.leftCols(e.cols()) = e;
    cols.rightCols(zd) = sigma_noise * MatX::Identity(zd, zd);
    return sqrtFactorFromColumns(cols);
  };

  MatX S_z = innovationSqrt(zbar, devs);
  std::vector<int> keep_rows(zbar.size());
  for (std::size_t i = 0; i < keep_rows.size(); ++i) {
    keep_rows[i] = static_cast<int>(i);
  }

  if (gate_chi2 > 0.0 && zbar.size() % 2 == 0) {
    const MatX P_zz = S_z * S_z.transpose();
    std::vector<int> kept;
    for (int i = 0; i < zbar.size() / 2; ++i) {
      const Eigen::Matrix2d B = P_zz.block<2, 2>(2 * i, 2 * i);
      const Vec2 r = zbar.segment<2>(2 * i);
      const double md = r.dot(B.inverse() * r);
      if (md <= gate_chi2) {
        kept.push_back(2 * i);
        kept.push_back(2 * i + 1);
      } else {
        ++out.lines_gated;
      }
    }
    if (kept.size() != keep_rows.size()) {
      if (kept.empty()) {
        out.note = "all lines gated";
        return out;
      }
      VecX z2(kept.size());
      MatX d2(kept.size(), devs.cols());
      for (std::size_t r = 0; r < kept.size(); ++r) {
        z2(r) = zbar(kept[r]);
        d2.row(r) = devs.row(kept[r]);
      }
      zbar = std::move(z2);
      devs = std::move(d2);
      S_z = innovationSqrt(zbar, devs);
    }
  }

  const double dmax = S_z.diagonal().cwiseAbs().maxCoeff();
  const double dmin = S_z.diagonal().cwiseAbs().minCoeff();
  if (dmax <= 0.0 || dmin < 1e-12 * dmax) {
    out.note = "innovation sqrt numerically singular";
    return out;
  }

  const MatX P_xz = state_devs * devs.transpose();
  const MatX Kt = S_z.transpose()
                      .triangularView<Eigen::Upper>()
                      .solve(MatX(S_z.triangularView<Eigen::Lower>().solve(
                          P_xz.transpose())));
  const MatX K = Kt.transpose();

  const VecX delta = K * (-zbar);
  if (!delta.allFinite()) {
    throw std::runtime_error("update: non-finite state correction");
  }
  applyTangent(fs, delta, out.state.chi, out.state.bias);

  const int zd = static_cast<int>(zbar.size());
  MatX cols(n, state_devs.cols() + zd);
  cols.leftCols(state_devs.cols()) = state_devs - K * devs;
  cols.rightCols(zd) = sigma_noise * K;
  out.state.S = sqrtFactorFromColumns(cols);

  out.applied = true;
  out.lines_used = zd / 2;
  out.S_z = std::move(S_z);
  out.innovation = -zbar;
  return out;
}

}  // namespace detail

/// Update with an arbitrary measurement model h(chi, bias) -> z_dim vector
/// under additive noise sigma_noise * I. Exposed for linear-surrogate
/// checks; the line update below shares the same core.
template <typename H>
UpdateOutcome updateWithModel(const FilterState& fs, int z_dim, int noise_dim,
                              double sigma_noise, H&& h,
                              double gate_chi2 = 0.0) {
  const int n = fs.dim();
  const int aug_dim = n + noise_dim;
  MatX S_aug = MatX::Zero(aug_dim, aug_dim);
  S_aug.topLeftCorner(n, n) = fs.S;
  S_aug.bottomRightCorner(noise_dim, noise_dim) =
      sigma_noise * MatX::Identity(noise_dim, noise_dim);
  const MatX gen = cubatureGenerators(S_aug);
  const std::vector<CubaturePoint> points = materializePoints(fs, gen);

  MatX Z(z_dim, 2 * aug_dim);
  for (int j = 0; j < 2 * aug_dim; ++j) {
    Z.col(j) = h(points[j].chi, points[j].bias);
  }
  const VecX zbar = Z.rowwise().mean();
  const double w = 1.0 / std::sqrt(2.0 * aug_dim);
  const MatX devs = w * (Z.colwise() - zbar);
  const MatX state_devs = w * gen.topRows(n).leftCols(2 * aug_dim);
  return detail::applyUpdateCore(fs, zbar, devs, state_devs, sigma_noise,
                                 gate_chi2);
}

/// Cubature-transformed line measurement: residual mean, scaled residual
/// deviations e^j, and the matching scaled state deviations. Pixel noise is
/// handled additively (it enters the S_s block of the update QR), so the
/// noise rows of the generators only fix the point count and h sees
/// n_s = 0. Lines whose projection degenerates at any point are left out of
/// `kept` and of the stacked rows.
struct MeasurementPrediction {
  VecX zbar;
  MatX devs;
  MatX state_devs;
  std::vector<int> kept;  // indices into batch.lines that survived
  int aug_dim = 0;        // I_m
};

inline MeasurementPrediction predictMeasurements(
    const FilterState& fs, const MeasurementBatch& batch,
    const CameraModel& cam) {
  std::vector<int> idx(batch.lines.size());
  for (std::size_t k = 0; k < batch.lines.size(); ++k) {
    idx[k] = fs.lineIndex(batch.lines[k].id);
    if (idx[k] < 0) {
      throw std::invalid_argument(
          "predictMeasurements: track id not in state");
    }
  }

  const int n = fs.dim();
  const int b = static_cast<int>(batch.lines.size());
  MeasurementPrediction out;
  out.aug_dim = n + 2 * b;  // I_m = 8m+15 with all state lines observed
  MatX S_aug = MatX::Zero(out.aug_dim, out.aug_dim);
  S_aug.topLeftCorner(n, n) = fs.S;
  S_aug.bottomRightCorner(2 * b, 2 * b) =
      batch.sigma_px * MatX::Identity(2 * b, 2 * b);
  const MatX gen = cubatureGenerators(S_aug);
  const std::vector<CubaturePoint> points = materializePoints(fs, gen);

  MatX Z = MatX::Zero(2 * b, 2 * out.aug_dim);
  std::vector<bool> bad(b, false);
  for (int j = 0; j < 2 * out.aug_dim; ++j) {
    for (int k = 0; k < b; ++k) {
      if (bad[k]) continue;
      try {
        const ImageLine l = predictImageLine(points[j].chi, idx[k], cam);
        Z.block<2, 1>(2 * k, j) =
            lineResidual(l, batch.lines[k].ss, batch.lines[k].se);
      } catch (const std::domain_error&) {
        bad[k] = true;
      }
    }
  }

  std::vector<int> rows;
  for (int k = 0; k < b; ++k) {
    if (!bad[k]) {
      out.kept.push_back(k);
      rows.push_back(2 * k);
      rows.push_back(2 * k + 1);
    }
  }
  const double w = 1.0 / std::sqrt(2.0 * out.aug_dim);
  MatX Zk(rows.size(), 2 * out.aug_dim);
  for (std::size_t r = 0; r < rows.size(); ++r) Zk.row(r) = Z.row(rows[r]);
  out.zbar = Zk.rowwise().mean();
  out.devs = w * (Zk.colwise() - out.zbar);
  out.state_devs = w * gen.topRows(n).leftCols(2 * out.aug_dim);
  return out;
}

/// Line-measurement update. Degenerate lines are dropped from this update
/// (they stay in the state); per-line chi-square gating runs when
/// gate_chi2 > 0.
inline UpdateOutcome update(const FilterState& fs,
                            const MeasurementBatch& batch,
                            const CameraModel& cam, double gate_chi2 = 0.0) {
  UpdateOutcome out;
  out.state = fs;
  if (batch.lines.empty()) {
    out.note = "empty measurement batch";
    return out;
  }

  const MeasurementPrediction pred = predictMeasurements(fs, batch, cam);
  const int degenerate =
      static_cast<int>(batch.lines.size() - pred.kept.size());
  if (pred.kept.empty()) {
    out.lines_degenerate = degenerate;
    out.note = "all line projections degenerate";
    return out;
  }

  UpdateOutcome core =
      detail::applyUpdateCore(fs, pred.zbar, pred.devs, pred.state_devs,
                              batch.sigma_px, gate_chi2);
  core.lines_degenerate = degenerate;
  return core;
}

/// Adds a freshly triangulated line with an independent sigma_init * I_6
/// sqrt block; existing factor entries are untouched.
inline FilterState augmentLine(const FilterState& fs, std::int64_t id,
                               const LineEndpoints& ends, double sigma_init,
                               int budget = 20) {
  if (fs.numLines() >= budget) {
    throw std::runtime_error("augmentLine: line budget exhausted");
  }
  if (fs.lineIndex(id) >= 0) {
    throw std::invalid_argument("augmentLine: duplicate track id");
  }
  const int n = fs.dim();
  const int lines_end = biasOffset(fs.numLines());
  FilterState out = fs;
  out.chi.appendLine(ends.ps, ends.pe);
  out.line_ids.push_back(id);
  MatX S = MatX::Zero(n + kLineDim, n + kLineDim);
  S.topLeftCorner(lines_end, lines_end) =
      fs.S.topLeftCorner(lines_end, lines_end);
  S.block(lines_end, lines_end, kLineDim, kLineDim) =
      sigma_init * MatX::Identity(kLineDim, kLineDim);
  S.block(lines_end + kLineDim, 0, kBiasDim, lines_end) =
      fs.S.bottomLeftCorner(kBiasDim, lines_end);
  S.bottomRightCorner(kBiasDim, kBiasDim) =
      fs.S.bottomRightCorner(kBiasDim, kBiasDim);
  out.S = S;
  return out;
}

/// Marginalizes a line out: its sqrt rows are deleted and the remaining
/// wide factor re-triangularized, which preserves the survivors' marginal
/// covariance exactly.
inline FilterState removeLine(const FilterState& fs, std::int64_t id) {
  const int idx = fs.lineIndex(id);
  if (idx < 0) {
    throw std::invalid_argument("removeLine: unknown track id");
  }
  const int n = fs.dim();
  const int off = lineOffset(idx);
  FilterState out = fs;
  out.chi.removeLine(idx);
  out.line_ids.erase(out.line_ids.begin() + idx);
  MatX rows(n - kLineDim, n);
  rows.topRows(off) = fs.S.topRows(off);
  rows.bottomRows(n - kLineDim - off) = fs.S.bottomRows(n - kLineDim - off);
  out.S = sqrtFactorFromColumns(rows);
  return out;
}

}  // namespace linevio
