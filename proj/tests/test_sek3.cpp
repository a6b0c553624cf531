#include "linevio/lie/sek3.hpp"

#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace linevio;

namespace {

VecX randomTangent(std::mt19937_64& rng, int m, double angle, double trans) {
  VecX xi(9 + 6 * m);
  xi.head<3>() = oracles::randomRotationVec(rng, angle);
  for (int i = 1; i < 3 + 2 * m; ++i) {
    xi.segment<3>(3 * i) = oracles::randomVec3(rng, trans);
  }
  return xi;
}

GroupState randomState(std::mt19937_64& rng, int m) {
  return groupExp(randomTangent(rng, m, 2.5, 5.0));
}

}  // namespace

TEST(GroupExp, ZeroGivesIdentity) {
  const GroupState g = groupExp(VecX::Zero(15));
  EXPECT_TRUE(g.rotation().isApprox(Mat3::Identity(), 1e-15));
  EXPECT_LT(g.columns().norm(), 1e-15);
}

TEST(GroupExp, PureTranslationPassesBlocksThrough) {
  VecX xi = VecX::Zero(15);
  xi.segment<3>(3) = Vec3(1, 2, 3);
  xi.segment<3>(12) = Vec3(-4, 0, 9);
  const GroupState g = groupExp(xi);
  EXPECT_TRUE(g.rotation().isApprox(Mat3::Identity(), 1e-15));
  EXPECT_LT((g.velocity() - Vec3(1, 2, 3)).norm(), 1e-15);
  EXPECT_LT((g.lineEnd(0) - Vec3(-4, 0, 9)).norm(), 1e-15);
}

TEST(GroupExp, MatchesEmbeddedMatrixExponential) {
  std::mt19937_64 rng(21);
  for (int m : {0, 1, 5}) {
    for (int i = 0; i < 100; ++i) {
      const VecX xi = randomTangent(rng, m, 2.5, 2.0);
      const MatX oracle =
          oracles::matrixExpSeries(oracles::embedTangent(xi), 30);
      EXPECT_LT((groupExp(xi).toMatrix() - oracle).norm(), 1e-10);
    }
  }
}

TEST(GroupExp, RejectsBadLength) {
  EXPECT_THROW(groupExp(VecX::Zero(10)), std::invalid_argument);
}

TEST(GroupLog, IdentityGivesZero) {
  EXPECT_LT(groupLog(GroupState::identity(3)).norm(), 1e-15);
}

TEST(GroupLog, RoundTripRandomTangents) {
  std::mt19937_64 rng(22);
  for (int m : {0, 1, 5}) {
    for (int i = 0; i < 1000 / 3; ++i) {
      const VecX xi = randomTangent(rng, m, M_PI - 0.1, 10.0);
      EXPECT_LT((groupLog(groupExp(xi)) - xi).norm(), 1e-9);
    }
  }
}

TEST(GroupLog, PureTranslationReturnedVerbatim) {
  GroupState g = GroupState::identity(1);
  g.setVelocity(Vec3(0.1, 0.2, 0.3));
  g.setPosition(Vec3(7, 8, 9));
  g.setLine(0, Vec3(1, 0, 0), Vec3(0, 1, 0));
  const VecX xi = groupLog(g);
  EXPECT_LT((xi.segment<3>(6) - Vec3(7, 8, 9)).norm(), 1e-15);
  EXPECT_LT((xi.segment<3>(9) - Vec3(1, 0, 0)).norm(), 1e-15);
}

TEST(GroupCompose, MatchesEmbeddedMatrixProduct) {
  std::mt19937_64 rng(23);
  for (int m : {0, 2}) {
    for (int i = 0; i < 200; ++i) {
      const GroupState a = randomState(rng, m);
      const GroupState b = randomState(rng, m);
      const MatX oracle = a.toMatrix() * b.toMatrix();
      EXPECT_LT((groupCompose(a, b).toMatrix() - oracle).norm(), 1e-12);
    }
  }
}

TEST(GroupCompose, IdentityIsNeutral) {
  std::mt19937_64 rng(24);
  const GroupState a = randomState(rng, 1);
  const GroupState e = GroupState::identity(1);
  EXPECT_LT((groupCompose(a, e).toMatrix() - a.toMatrix()).norm(), 1e-14);
  EXPECT_LT((groupCompose(e, a).toMatrix() - a.toMatrix()).norm(), 1e-14);
}

TEST(GroupCompose, RejectsMismatchedLandmarkCounts) {
  EXPECT_THROW(
      groupCompose(GroupState::identity(1), GroupState::identity(2)),
      std::invalid_argument);
}

TEST(GroupInverse, ComposeWithInverseGivesIdentity) {
  std::mt19937_64 rng(25);
  for (int i = 0; i < 100; ++i) {
    const GroupState a = randomState(rng, 2);
    const MatX prod = groupCompose(a, groupInverse(a)).toMatrix();
    EXPECT_LT((prod - MatX::Identity(prod.rows(), prod.cols())).norm(), 1e-10);
  }
}

TEST(GroupState, ExpLogEmbeddingConsistency) {
  std::mt19937_64 rng(26);
  for (int i = 0; i < 200; ++i) {
    const GroupState chi = randomState(rng, 1);
    const GroupState back = groupExp(groupLog(chi));
    EXPECT_LT((back.toMatrix() - chi.toMatrix()).norm(), 1e-9);
  }
}

TEST(GroupState, AppendAndRemoveLines) {
  GroupState g = GroupState::identity(0);
  g.appendLine(Vec3(1, 2, 3), Vec3(4, 5, 6));
  g.appendLine(Vec3(7, 8, 9), Vec3(10, 11, 12));
  EXPECT_EQ(g.numLines(), 2);
  g.removeLine(0);
  EXPECT_EQ(g.numLines(), 1);
  EXPECT_LT((g.lineStart(0) - Vec3(7, 8, 9)).norm(), 1e-15);
  EXPECT_THROW(g.removeLine(5), std::out_of_range);
}
