#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "linevio/pipeline/runner.hpp"
#include "linevio/sim/scenario.hpp"

namespace linevio {
namespace {

PipelineConfig configFor(const ScenarioSpec& spec, int max_lines = 6) {
  PipelineConfig cfg;
  cfg.camera = spec.camera;
  cfg.noise = spec.noise;
  cfg.sigma_px = std::max(spec.sigma_px, 0.1);  // keep noise rows regular
  cfg.filter.max_lines = max_lines;
  return cfg;
}

TEST(Pipeline, DeadReckoningEqualsDirectIntegration) {
  ScenarioSpec spec;
  spec.duration_s = 4.5;  // below the renormalization interval
  const auto imu = synthesizeImu(spec);
  const auto tracks = synthesizeTracks(spec);
  const auto gt = groundTruth(spec);
  const PipelineConfig cfg = configFor(spec);

  const RunResult run = runPipeline(imu, tracks, cfg, gt, false);
  ASSERT_FALSE(run.diverged) << run.note;
  ASSERT_EQ(run.trajectory.size(), 91u);

  NavState nav{gt.front().R, gt.front().v, gt.front().p};
  size_t ri = 0;
  for (size_t k = 0; k + 1 < imu.size(); ++k) {
    if (run.trajectory[ri].t == imu[k].t) {
      EXPECT_LT((run.trajectory[ri].p - nav.p).norm(), 1e-12);
      EXPECT_LT((run.trajectory[ri].R - nav.R).norm(), 1e-12);
      EXPECT_LT((run.trajectory[ri].v - nav.v).norm(), 1e-12);
      ++ri;
    }
    nav = propagateNav(nav, imu[k].gyro, imu[k].accel, spec.noise.gravity,
                       toSeconds(imu[k + 1].t - imu[k].t));
  }
  EXPECT_EQ(ri, run.trajectory.size() - 1);  // last frame sits on imu.back()
}

TEST(Pipeline, NoiselessRunStaysOnGroundTruth) {
  ScenarioSpec spec;
  spec.duration_s = 10.0;
  spec.sigma_px = 0.0;  // exact segments
  spec.noise.sigma_g = 1e-6;
  spec.noise.sigma_a = 1e-6;  // filter still models a little noise
  const auto imu = synthesizeImu(spec);
  const auto tracks = synthesizeTracks(spec);
  const auto gt = groundTruth(spec);

  const RunResult run = runPipeline(imu, tracks, configFor(spec), gt);
  ASSERT_FALSE(run.diverged) << run.note;
  EXPECT_GT(run.stats.updates_applied, 100);
  EXPECT_GT(run.final_state.numLines(), 0);

  // The residual error is the zero-order-hold floor: the simulator samples
  // the continuous trajectory at the IMU rate while the filter integrates
  // each sample as if held constant over the interval. At 200 Hz on this
  // trajectory that floor is ~7e-4 m / ~6e-6 rad over 10 s.
  EXPECT_LT(positionRmse(run.trajectory, gt), 2e-3);
  EXPECT_LT(attitudeRmse(run.trajectory, gt), 2e-5);
}

TEST(Pipeline, UpdatesBeatDeadReckoningUnderNoise) {
  // Full orbit: landmarks initialized on the first pass come back into view
  // near the end, so the persistent map acts as a loop-closure anchor.
  ScenarioSpec spec;
  spec.duration_s = 60.0;
  spec.seed = 4;
  spec.noise.sigma_g = 1.7e-4;
  spec.noise.sigma_a = 2.0e-3;
  spec.noise.sigma_bg = 1e-6;
  spec.noise.sigma_ba = 1e-5;
  spec.sigma_px = 1.5;
  const auto imu = synthesizeImu(spec);
  const auto tracks = synthesizeTracks(spec);
  const auto gt = groundTruth(spec);
  const PipelineConfig cfg = configFor(spec, 20);

  const RunResult filt = runPipeline(imu, tracks, cfg, gt, true);
  const RunResult dead = runPipeline(imu, tracks, cfg, gt, false);
  ASSERT_FALSE(filt.diverged) << filt.note;
  ASSERT_FALSE(dead.diverged) << dead.note;

  const Vec3 gt_end = gt.back().p;
  const double err_filt = (filt.trajectory.back().p - gt_end).norm();
  const double err_dead = (dead.trajectory.back().p - gt_end).norm();
  EXPECT_LT(err_filt, 0.5);
  EXPECT_LT(err_filt, 0.2 * err_dead);

  // a healthy run keeps NEES within the same order as its 9 dof
  EXPECT_GT(filt.stats.nees_count, 0);
  EXPECT_GT(filt.stats.nees_mean, 1.0);
  EXPECT_LT(filt.stats.nees_mean, 40.0);
}

TEST(Pipeline, TrajectoryFollowsFrameGrid) {
  ScenarioSpec spec;
  spec.duration_s = 3.0;
  const auto imu = synthesizeImu(spec);
  const auto tracks = synthesizeTracks(spec);
  const auto gt = groundTruth(spec);

  const RunResult run = runPipeline(imu, tracks, configFor(spec), gt);
  ASSERT_FALSE(run.diverged);
  ASSERT_EQ(run.frames.size(), run.trajectory.size());
  Timestamp prev = -1;
  for (const TrajectoryRecord& r : run.trajectory) {
    EXPECT_GT(r.t, prev);
    EXPECT_EQ(r.t % 50000000LL, 0);
    prev = r.t;
  }
  for (const FrameDiagnostic& d : run.frames) {
    EXPECT_GE(d.trace_P, 0.0);
    EXPECT_GE(d.nees, 0.0);  // ground truth exists at every frame
  }
}

TEST(Pipeline, IdenticalInputsGiveIdenticalOutputs) {
  ScenarioSpec spec;
  spec.duration_s = 10.0;
  spec.seed = 6;
  spec.noise.sigma_g = 1e-4;
  spec.noise.sigma_a = 1e-3;
  const auto imu = synthesizeImu(spec);
  const auto tracks = synthesizeTracks(spec);
  const auto gt = groundTruth(spec);
  const PipelineConfig cfg = configFor(spec);

  const RunResult a = runPipeline(imu, tracks, cfg, gt);
  const RunResult b = runPipeline(imu, tracks, cfg, gt);
  ASSERT_EQ(a.trajectory.size(), b.trajectory.size());
  for (size_t i = 0; i < a.trajectory.size(); ++i) {
    EXPECT_EQ(a.trajectory[i].p, b.trajectory[i].p);
    EXPECT_EQ(a.trajectory[i].R, b.trajectory[i].R);
    EXPECT_EQ(a.trajectory[i].v, b.trajectory[i].v);
  }
  EXPECT_EQ(a.stats.nees_mean, b.stats.nees_mean);
}

TEST(Pipeline, DivergenceIsReportedNotThrown) {
  ScenarioSpec spec;
  spec.duration_s = 1.0;
  auto imu = synthesizeImu(spec);
  for (size_t k = 50; k < imu.size(); ++k) {
    imu[k].accel = Vec3::Constant(1e308);  // overflow the integrator
  }
  const auto tracks = synthesizeTracks(spec);
  const auto gt = groundTruth(spec);

  RunResult run;
  ASSERT_NO_THROW(run = runPipeline(imu, tracks, configFor(spec), gt));
  EXPECT_TRUE(run.diverged);
  EXPECT_FALSE(run.note.empty());
}

TEST(Pipeline, RejectsFramesOutsideImuCoverage) {
  ScenarioSpec spec;
  spec.duration_s = 2.0;
  const auto imu = synthesizeImu(spec);
  auto tracks = synthesizeTracks(spec);
  tracks.back().t = imu.back().t + 1000;
  EXPECT_THROW(runPipeline(imu, tracks, configFor(spec)),
               std::invalid_argument);
}

TEST(Pipeline, RejectsMisalignedGroundTruthStart) {
  ScenarioSpec spec;
  spec.duration_s = 2.0;
  const auto imu = synthesizeImu(spec);
  const auto tracks = synthesizeTracks(spec);
  auto gt = groundTruth(spec);
  for (auto& r : gt) r.t += 5000000;
  EXPECT_THROW(runPipeline(imu, tracks, configFor(spec), gt),
               std::invalid_argument);
}

}  // namespace
}  // namespace linevio
