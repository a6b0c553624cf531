#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "linevio/core/types.hpp"
#include "linevio/imu/model.hpp"
#include "linevio/lie/sek3.hpp"

namespace linevio {

/// Tangent/covariance layout: body block (xi_R, xi_v, xi_p), then 6 rows per
/// line (xi_ps, xi_pe), then the bias block (b_g, b_a) at the end.
inline constexpr int kBodyDim = 9;
inline constexpr int kBiasDim = 6;
inline constexpr int kLineDim = 6;

inline int stateDim(int num_lines) {
  return kBodyDim + kLineDim * num_lines + kBiasDim;
}

inline int lineOffset(int i) { return kBodyDim + kLineDim * i; }

inline int biasOffset(int num_lines) {
  return kBodyDim + kLineDim * num_lines;
}

/// Filter estimate: group mean (pose, velocity, line endpoints), bias mean,
/// and the lower-triangular square root S of the error covariance P = S S^T.
struct FilterState {
  GroupState chi;
  ImuBias bias;
  MatX S;
  std::vector<std::int64_t> line_ids;

  int numLines() const { return chi.numLines(); }
  int dim() const { return stateDim(chi.numLines()); }

  /// Index of a tracked line in the state, or -1.
  int lineIndex(std::int64_t id) const {
    for (std::size_t i = 0; i < line_ids.size(); ++i) {
      if (line_ids[i] == id) return static_cast<int>(i);
    }
    return -1;
  }
};

/// Identity-mean state with a diagonal sqrt covariance.
inline FilterState makeFilterState(int num_lines, const VecX& sqrt_diag) {
  if (sqrt_diag.size() != stateDim(num_lines)) {
    throw std::invalid_argument("makeFilterState: diagonal length mismatch");
  }
  FilterState fs;
  fs.chi = GroupState::identity(num_lines);
  fs.S = sqrt_diag.asDiagonal();
  fs.line_ids.resize(num_lines);
  for (int i = 0; i < num_lines; ++i) fs.line_ids[i] = i;
  return fs;
}

/// Splits a full-state tangent column into its group part and bias part and
/// materializes the perturbed state (chi on the group, bias additively).
inline void applyTangent(const FilterState& fs, const VecX& delta,
                         GroupState& chi_out, ImuBias& bias_out) {
  const int m = fs.numLines();
  if (delta.size() != stateDim(m)) {
    throw std::invalid_argument("applyTangent: tangent length mismatch");
  }
  chi_out = groupCompose(groupExp(delta.head(kBodyDim + kLineDim * m)),
                         fs.chi);
  bias_out.bg = fs.bias.bg + delta.segment<3>(biasOffset(m));
  bias_out.ba = fs.bias.ba + delta.segment<3>(biasOffset(m) + 3);
}

}  // namespace linevio
