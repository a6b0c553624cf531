#include <gtest/gtest.h>

#include "linevio/filter/lifecycle.hpp"

using namespace linevio;

namespace {

CameraModel fixtureCamera() {
  CameraModel cam;
  cam.fu = 458.654;
  cam.fv = 457.296;
  cam.cu = 367.215;
  cam.cv = 248.375;
  cam.width = 752;
  cam.height = 480;
  return cam;
}

Vec2 pinhole(const CameraModel& cam, const Vec3& pc) {
  return Vec2(cam.fu * pc.x() / pc.z() + cam.cu,
              cam.fv * pc.y() / pc.z() + cam.cv);
}

FilterState bodyAt(const Vec3& p, int m = 0) {
  FilterState fs;
  fs.chi = GroupState::identity(m);
  fs.chi.setPosition(p);
  fs.S = MatX::Identity(stateDim(m), stateDim(m)) * 1e-3;
  fs.line_ids.resize(m);
  for (int i = 0; i < m; ++i) fs.line_ids[i] = i;
  return fs;
}

LineTrack render(const CameraModel& cam, const Vec3& cam_pos,
                 std::int64_t id, const Vec3& P1, const Vec3& P2) {
  return LineTrack{0, id, pinhole(cam, P1 - cam_pos),
                   pinhole(cam, P2 - cam_pos)};
}

}  // namespace

TEST(LineManager, EmptyFrameKeepsStateAndCountsMisses) {
  const CameraModel cam = fixtureCamera();
  LifecycleConfig cfg;
  cfg.miss_limit = 3;
  LineManager mgr(cfg);
  FilterState fs = bodyAt(Vec3::Zero(), 2);
  fs.chi.setLine(0, Vec3(0.5, -0.5, 4.0), Vec3(0.5, 0.5, 4.0));
  fs.chi.setLine(1, Vec3(-0.5, -0.5, 5.0), Vec3(-0.5, 0.5, 5.0));

  for (int k = 0; k < cfg.miss_limit - 1; ++k) {
    const auto r = mgr.processFrame(fs, {}, cam, 1.5);
    EXPECT_TRUE(r.batch.lines.empty());
    EXPECT_EQ(r.augmented, 0);
    EXPECT_EQ(r.removed, 0);
    EXPECT_EQ(fs.numLines(), 2);
  }
  // miss_limit-th consecutive empty frame retires both lines
  const auto r = mgr.processFrame(fs, {}, cam, 1.5);
  EXPECT_EQ(r.removed, 2);
  EXPECT_EQ(fs.numLines(), 0);
}

TEST(LineManager, MatchedTrackResetsMissCounter) {
  const CameraModel cam = fixtureCamera();
  LifecycleConfig cfg;
  cfg.miss_limit = 3;
  LineManager mgr(cfg);
  FilterState fs = bodyAt(Vec3::Zero(), 1);
  const Vec3 P1(0.5, -0.5, 4.0), P2(0.5, 0.5, 4.0);
  fs.chi.setLine(0, P1, P2);

  mgr.processFrame(fs, {}, cam, 1.5);
  mgr.processFrame(fs, {}, cam, 1.5);
  const auto matched =
      mgr.processFrame(fs, {render(cam, Vec3::Zero(), 0, P1, P2)}, cam, 1.5);
  ASSERT_EQ(matched.batch.lines.size(), 1u);
  EXPECT_EQ(matched.batch.lines[0].id, 0);
  // counter was reset, so two more empty frames still keep the line
  mgr.processFrame(fs, {}, cam, 1.5);
  mgr.processFrame(fs, {}, cam, 1.5);
  EXPECT_EQ(fs.numLines(), 1);
  const auto r = mgr.processFrame(fs, {}, cam, 1.5);
  EXPECT_EQ(r.removed, 1);
  EXPECT_EQ(fs.numLines(), 0);
}

TEST(LineManager, CandidateTriangulatedAfterBaseline) {
  const CameraModel cam = fixtureCamera();
  LineManager mgr;  // min_baseline 0.5 m
  FilterState fs = bodyAt(Vec3::Zero());
  const Vec3 P1(0.3, -0.6, 4.0), P2(0.35, 0.7, 4.2);

  auto r = mgr.processFrame(fs, {render(cam, Vec3::Zero(), 5, P1, P2)}, cam,
                            0.5);
  EXPECT_EQ(r.augmented, 0);
  EXPECT_EQ(r.candidates, 1);

  fs.chi.setPosition(Vec3(0.7, 0.0, 0.0));
  r = mgr.processFrame(fs, {render(cam, Vec3(0.7, 0, 0), 5, P1, P2)}, cam,
                       0.5);
  EXPECT_EQ(r.augmented, 1);
  EXPECT_EQ(r.candidates, 0);
  ASSERT_EQ(fs.numLines(), 1);
  EXPECT_EQ(fs.line_ids[0], 5);
  // noiseless pixels, exact poses: endpoints land on the true segment
  EXPECT_LT((fs.chi.lineStart(0) - P1).norm(), 1e-6);
  EXPECT_LT((fs.chi.lineEnd(0) - P2).norm(), 1e-6);
}

TEST(LineManager, InsufficientBaselineKeepsCandidate) {
  const CameraModel cam = fixtureCamera();
  LineManager mgr;
  FilterState fs = bodyAt(Vec3::Zero());
  const Vec3 P1(0.3, -0.6, 4.0), P2(0.35, 0.7, 4.2);

  mgr.processFrame(fs, {render(cam, Vec3::Zero(), 5, P1, P2)}, cam, 1.5);
  fs.chi.setPosition(Vec3(0.01, 0.0, 0.0));
  const auto r = mgr.processFrame(
      fs, {render(cam, Vec3(0.01, 0, 0), 5, P1, P2)}, cam, 1.5);
  EXPECT_EQ(r.augmented, 0);
  EXPECT_EQ(r.candidates, 1);
  EXPECT_EQ(fs.numLines(), 0);
}

TEST(LineManager, MotionAlongLineKeepsCandidate) {
  const CameraModel cam = fixtureCamera();
  LineManager mgr;
  FilterState fs = bodyAt(Vec3::Zero());
  // horizontal line; camera translates along its direction
  const Vec3 P1(-1.0, 0.2, 5.0), P2(1.0, 0.2, 5.0);

  mgr.processFrame(fs, {render(cam, Vec3::Zero(), 8, P1, P2)}, cam, 1.5);
  fs.chi.setPosition(Vec3(0.8, 0.0, 0.0));
  const auto r = mgr.processFrame(
      fs, {render(cam, Vec3(0.8, 0, 0), 8, P1, P2)}, cam, 1.5);
  EXPECT_EQ(r.augmented, 0);
  EXPECT_EQ(r.candidates, 1);
}

TEST(LineManager, FullBudgetKeepsCandidateInBuffer) {
  const CameraModel cam = fixtureCamera();
  LineManager mgr;
  FilterState fs = bodyAt(Vec3::Zero());
  for (int i = 0; i < 20; ++i) {
    fs = augmentLine(fs, 100 + i,
                     LineEndpoints{Vec3(0.1 * i, -0.5, 5.0),
                                   Vec3(0.1 * i, 0.5, 5.0)},
                     0.5);
  }
  ASSERT_EQ(fs.numLines(), 20);

  const Vec3 P1(0.3, -0.6, 4.0), P2(0.35, 0.7, 4.2);
  mgr.processFrame(fs, {render(cam, Vec3::Zero(), 7, P1, P2)}, cam, 0.5);
  fs.chi.setPosition(Vec3(0.7, 0.0, 0.0));
  const auto r = mgr.processFrame(
      fs, {render(cam, Vec3(0.7, 0, 0), 7, P1, P2)}, cam, 0.5);
  EXPECT_EQ(r.augmented, 0);
  EXPECT_EQ(r.candidates, 1);
  EXPECT_EQ(fs.numLines(), 20);

  // freeing budget lets the buffered candidate in on the next sighting
  fs = removeLine(fs, 100);
  fs.chi.setPosition(Vec3(1.0, 0.0, 0.0));
  const auto r2 = mgr.processFrame(
      fs, {render(cam, Vec3(1.0, 0, 0), 7, P1, P2)}, cam, 0.5);
  EXPECT_EQ(r2.augmented, 1);
  EXPECT_EQ(fs.numLines(), 20);
  EXPECT_GE(fs.lineIndex(7), 0);
}

TEST(LineManager, AbandonedCandidateExpires) {
  const CameraModel cam = fixtureCamera();
  LifecycleConfig cfg;
  cfg.miss_limit = 3;
  LineManager mgr(cfg);
  FilterState fs = bodyAt(Vec3::Zero());
  const Vec3 P1(0.3, -0.6, 4.0), P2(0.35, 0.7, 4.2);

  auto r = mgr.processFrame(fs, {render(cam, Vec3::Zero(), 5, P1, P2)}, cam,
                            1.5);
  EXPECT_EQ(r.candidates, 1);
  for (int k = 0; k < cfg.miss_limit; ++k) {
    r = mgr.processFrame(fs, {}, cam, 1.5);
  }
  EXPECT_EQ(r.candidates, 0);
}
