#pragma once

#include <stdexcept>
#include <utility>

#include <Eigen/Core>

#include "linevio/core/types.hpp"
#include "linevio/lie/so3.hpp"

namespace linevio {

/// Element of SE_{2+2m}(3): a rotation plus 2+2m translation-like columns.
/// Column order is fixed as [v, p, ps_1, pe_1, ..., ps_m, pe_m], i.e. body
/// velocity and position followed by the two world-frame endpoints of each
/// line landmark. The element embeds as the (5+2m)x(5+2m) block matrix
///
///   [ R  t_1 ... t_{2+2m} ]
///   [ 0        I          ]
///
/// and the tangent space has dimension 6m+9, ordered to match the columns:
/// [xi_R, xi_v, xi_p, xi_ps1, xi_pe1, ...].
class GroupState {
 public:
  GroupState() : R_(Mat3::Identity()), cols_(3, 2) { cols_.setZero(); }

  GroupState(Mat3 R, Mat3X cols) : R_(std::move(R)), cols_(std::move(cols)) {
    if (cols_.cols() < 2 || (cols_.cols() - 2) % 2 != 0) {
      throw std::invalid_argument("GroupState: column count must be 2+2m");
    }
  }

  static GroupState identity(int num_lines) {
    GroupState g;
    g.cols_.setZero(3, 2 + 2 * num_lines);
    return g;
  }

  int numLines() const { return static_cast<int>(cols_.cols() - 2) / 2; }
  int tangentDim() const { return 3 + 3 * static_cast<int>(cols_.cols()); }

  const Mat3& rotation() const { return R_; }
  Vec3 velocity() const { return cols_.col(0); }
  Vec3 position() const { return cols_.col(1); }
  Vec3 lineStart(int i) const { return cols_.col(2 + 2 * i); }
  Vec3 lineEnd(int i) const { return cols_.col(3 + 2 * i); }
  const Mat3X& columns() const { return cols_; }

  void setRotation(const Mat3& R) { R_ = R; }
  void setVelocity(const Vec3& v) { cols_.col(0) = v; }
  void setPosition(const Vec3& p) { cols_.col(1) = p; }
  void setLine(int i, const Vec3& ps, const Vec3& pe) {
    cols_.col(2 + 2 * i) = ps;
    cols_.col(3 + 2 * i) = pe;
  }

  /// Appends one line landmark (two endpoint columns).
  void appendLine(const Vec3& ps, const Vec3& pe) {
    cols_.conservativeResize(Eigen::NoChange, cols_.cols() + 2);
    cols_.col(cols_.cols() - 2) = ps;
    cols_.col(cols_.cols() - 1) = pe;
  }

  /// Removes line landmark i (both endpoint columns).
  void removeLine(int i) {
    const int c = 2 + 2 * i;
    const int ncols = static_cast<int>(cols_.cols());
    if (i < 0 || c + 1 >= ncols) {
      throw std::out_of_range("GroupState::removeLine: index out of range");
    }
    Mat3X out(3, ncols - 2);
    out.leftCols(c) = cols_.leftCols(c);
    out.rightCols(ncols - c - 2) = cols_.rightCols(ncols - c - 2);
    cols_ = std::move(out);
  }

  /// Dense (5+2m)x(5+2m) embedding.
  MatX toMatrix() const {
    const int k = static_cast<int>(cols_.cols());
    MatX m = MatX::Identity(3 + k, 3 + k);
    m.topLeftCorner<3, 3>() = R_;
    m.block(0, 3, 3, k) = cols_;
    return m;
  }

 private:
  Mat3 R_;
  Mat3X cols_;
};

/// exp on SE_{2+2m}(3): R = exp(xi_R), every translation column through the
/// SO(3) left Jacobian. Matches the matrix exponential of the embedded
/// algebra element.
inline GroupState groupExp(const VecX& xi) {
  if (xi.size() < 9 || (xi.size() - 9) % 6 != 0) {
    throw std::invalid_argument("groupExp: tangent length must be 6m+9");
  }
  const Vec3 phi = xi.head<3>();
  const Mat3 J = so3LeftJacobian(phi);
  const int k = static_cast<int>(xi.size() - 3) / 3;
  Mat3X cols(3, k);
  for (int i = 0; i < k; ++i) {
    cols.col(i) = J * xi.segment<3>(3 + 3 * i);
  }
  return GroupState(so3Exp(phi), std::move(cols));
}

/// Inverse of groupExp. Solves J_l(xi_R) xi_i = t_i per column so the round
/// trip holds to machine precision. Same pi-margin domain as so3Log.
inline VecX groupLog(const GroupState& g) {
  const Vec3 phi = so3Log(g.rotation());
  const Mat3 J = so3LeftJacobian(phi);
  const auto lu = J.partialPivLu();
  const int k = static_cast<int>(g.columns().cols());
  VecX xi(3 + 3 * k);
  xi.head<3>() = phi;
  for (int i = 0; i < k; ++i) {
    xi.segment<3>(3 + 3 * i) = lu.solve(g.columns().col(i));
  }
  return xi;
}

inline GroupState groupCompose(const GroupState& a, const GroupState& b) {
  if (a.numLines() != b.numLines()) {
    throw std::invalid_argument("groupCompose: landmark counts differ");
  }
  return GroupState(a.rotation() * b.rotation(),
                    a.rotation() * b.columns() + a.columns());
}

inline GroupState groupInverse(const GroupState& a) {
  const Mat3 Rt = a.rotation().transpose();
  return GroupState(Rt, -(Rt * a.columns()));
}

}  // namespace linevio
