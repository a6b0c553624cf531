#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "linevio/core/types.hpp"
#include "linevio/filter/state.hpp"

namespace linevio {

/// One materialized cubature point: perturbed state plus the noise block of
/// its generator column.
struct CubaturePoint {
  GroupState chi;
  ImuBias bias;
  VecX noise;
};

/// Generator columns of the third-degree spherical-radial rule for a
/// lower-triangular sqrt factor: column j is +sqrt(I) S_aug e_j, column
/// I + j is the negative, with I = dim(S_aug).
inline MatX cubatureGenerators(const MatX& S_aug) {
  if (!S_aug.allFinite()) {
    throw std::invalid_argument("cubatureGenerators: non-finite sqrt factor");
  }
  const int dim = static_cast<int>(S_aug.rows());
  const double scale = std::sqrt(static_cast<double>(dim));
  MatX gen(dim, 2 * dim);
  gen.leftCols(dim) = scale * S_aug;
  gen.rightCols(dim) = -scale * S_aug;
  return gen;
}

/// Materializes generator columns against a filter state. Columns must be
/// the state tangent followed by noise_dim extra rows.
inline std::vector<CubaturePoint> materializePoints(const FilterState& fs,
                                                    const MatX& generators) {
  const int n = fs.dim();
  if (generators.rows() < n) {
    throw std::invalid_argument("materializePoints: generator rows too few");
  }
  std::vector<CubaturePoint> points(generators.cols());
  for (int j = 0; j < generators.cols(); ++j) {
    applyTangent(fs, generators.col(j).head(n), points[j].chi,
                 points[j].bias);
    points[j].noise = generators.col(j).tail(generators.rows() - n);
  }
  return points;
}

/// Lower-triangular sqrt factor with non-negative diagonal such that
/// out * out^T = cols * cols^T, via thin QR of cols^T.
inline MatX sqrtFactorFromColumns(const MatX& cols) {
  if (!cols.allFinite()) {
    throw std::invalid_argument("sqrtFactorFromColumns: non-finite input");
  }
  const int n = static_cast<int>(cols.rows());
  if (cols.cols() < n) {
    throw std::invalid_argument("sqrtFactorFromColumns: too few columns");
  }
  const Eigen::HouseholderQR<MatX> qr(cols.transpose());
  MatX R = MatX(qr.matrixQR().topLeftCorner(n, n))
               .triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i) {
    if (R(i, i) < 0.0) R.row(i) = -R.row(i);
  }
  return R.transpose();
}

}  // namespace linevio
