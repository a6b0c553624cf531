#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "linevio/eval/metrics.hpp"
#include "linevio/filter/lifecycle.hpp"
#include "linevio/filter/srckf.hpp"
#include "linevio/imu/model.hpp"
#include "linevio/io/config.hpp"
#include "linevio/io/formats.hpp"
#include "linevio/lie/so3.hpp"

namespace linevio {

// Initial sqrt uncertainties. The body state is seeded from ground truth (or
// a fixed origin), so these only need to be small against the process noise
// the filter accumulates within the first few frames.
constexpr double kInitStdBody = 1e-5;
constexpr double kInitStdBias = 1e-8;

/// Per-frame filter health snapshot.
struct FrameDiagnostic {
  Timestamp t = 0;
  int active_lines = 0;
  int lines_used = 0;
  int lines_gated = 0;
  int augmented = 0;
  int removed = 0;
  bool had_batch = false;
  bool update_applied = false;
  double trace_P = 0.0;
  double nees = -1.0;  // -1 when no ground truth at this stamp
};

struct RunStats {
  long frames = 0;
  long frames_with_batch = 0;
  long updates_applied = 0;
  double nees_mean = 0.0;
  long nees_count = 0;
};

struct RunResult {
  std::vector<TrajectoryRecord> trajectory;  // one record per camera frame
  std::vector<FrameDiagnostic> frames;
  RunStats stats;
  FilterState final_state;
  bool diverged = false;
  std::string note;
};

namespace detail {

struct Frame {
  Timestamp t = 0;
  std::vector<LineTrack> tracks;
};

inline std::vector<Frame> groupByTimestamp(
    const std::vector<LineTrack>& tracks) {
  std::vector<Frame> frames;
  for (const LineTrack& t : tracks) {
    if (frames.empty() || frames.back().t != t.t) {
      frames.push_back(Frame{t.t, {}});
    }
    frames.back().tracks.push_back(t);
  }
  return frames;
}

inline bool stateIsFinite(const FilterState& fs) {
  return fs.chi.rotation().allFinite() && fs.chi.columns().allFinite() &&
         fs.S.allFinite() && fs.bias.bg.allFinite() && fs.bias.ba.allFinite();
}

}  // namespace detail

/// Runs the filter over merged IMU and frame streams. Frames sharing an IMU
/// timestamp are handled propagate-then-update. Ground truth, when given,
/// seeds the initial state and enables per-frame NEES; with do_updates off
/// the run is pure dead reckoning over the same frame grid.
inline RunResult runPipeline(const std::vector<ImuSample>& imu,
                             const std::vector<LineTrack>& tracks,
                             const PipelineConfig& cfg,
                             const std::vector<TrajectoryRecord>& gt = {},
                             bool do_updates = true) {
  if (imu.size() < 2) {
    throw std::invalid_argument("need at least two IMU samples");
  }
  const std::vector<detail::Frame> frames = detail::groupByTimestamp(tracks);
  if (!frames.empty() && (frames.front().t < imu.front().t ||
                          frames.back().t > imu.back().t)) {
    std::ostringstream os;
    os << "camera frames [" << frames.front().t << ", " << frames.back().t
       << "] exceed IMU coverage [" << imu.front().t << ", " << imu.back().t
       << "]";
    throw std::invalid_argument(os.str());
  }
  if (!gt.empty() && gt.front().t != imu.front().t) {
    throw std::invalid_argument(
        "ground truth must start at the first IMU timestamp");
  }

  VecX init_sqrt = VecX::Constant(stateDim(0), kInitStdBody);
  init_sqrt.tail<kBiasDim>().setConstant(kInitStdBias);
  FilterState fs = makeFilterState(0, init_sqrt);
  if (!gt.empty()) {
    fs.chi.setRotation(gt.front().R);
    fs.chi.setVelocity(gt.front().v);
    fs.chi.setPosition(gt.front().p);
  }

  std::unordered_map<Timestamp, size_t> gt_index;
  for (size_t i = 0; i < gt.size(); ++i) gt_index.emplace(gt[i].t, i);

  LifecycleConfig lc;
  lc.max_lines = cfg.filter.max_lines;
  lc.miss_limit = cfg.filter.miss_frames_drop;
  lc.min_baseline = cfg.filter.min_baseline_m;
  lc.sigma_init = cfg.filter.init_sigma_line;
  lc.sigma_init_max = cfg.filter.init_sigma_line_max;
  LineManager manager(lc);

  RunResult out;
  long steps = 0;

  const auto fail = [&](Timestamp t, const std::string& why) {
    std::ostringstream os;
    os << why << " at t=" << t << " ns";
    out.diverged = true;
    out.note = os.str();
  };

  const auto processFrame = [&](const detail::Frame& frame) {
    FrameDiagnostic d;
    d.t = frame.t;
    if (do_updates) {
      const LineManager::FrameResult res =
          manager.processFrame(fs, frame.tracks, cfg.camera, cfg.sigma_px);
      d.augmented = res.augmented;
      d.removed = res.removed;
      if (!res.batch.lines.empty()) {
        d.had_batch = true;
        ++out.stats.frames_with_batch;
        const UpdateOutcome u =
            update(fs, res.batch, cfg.camera, cfg.filter.gate_chi2);
        fs = u.state;
        d.update_applied = u.applied;
        d.lines_used = u.lines_used;
        d.lines_gated = u.lines_gated;
        out.stats.updates_applied += u.applied ? 1 : 0;
      }
    }
    if (!detail::stateIsFinite(fs)) {
      fail(frame.t, "non-finite state after update");
      return false;
    }
    d.active_lines = fs.numLines();
    d.trace_P = fs.S.squaredNorm();
    const auto it = gt_index.find(frame.t);
    if (it != gt_index.end()) {
      const TrajectoryRecord& g = gt[it->second];
      try {
        d.nees = bodyNees(
            NavState{fs.chi.rotation(), fs.chi.velocity(), fs.chi.position()},
            NavState{g.R, g.v, g.p}, MatX(fs.S.topLeftCorner(9, 9)));
        out.stats.nees_mean += d.nees;
        ++out.stats.nees_count;
      } catch (const std::exception&) {
        d.nees = std::numeric_limits<double>::infinity();
      }
    }
    out.frames.push_back(d);
    out.trajectory.push_back(TrajectoryRecord{
        frame.t, fs.chi.position(), fs.chi.rotation(), fs.chi.velocity()});
    ++out.stats.frames;
    return true;
  };

  const auto step = [&](const ImuSample& u, Timestamp from, Timestamp to) {
    fs = propagate(fs, u, toSeconds(to - from), cfg.noise);
    if (++steps % kRenormInterval == 0) {
      fs.chi.setRotation(orthonormalized(fs.chi.rotation()));
    }
    if (!detail::stateIsFinite(fs)) {
      fail(to, "non-finite state after propagation");
      return false;
    }
    return true;
  };

  size_t fi = 0;
  try {
    for (size_t k = 0; k + 1 < imu.size() && !out.diverged; ++k) {
      const Timestamp t0 = imu[k].t;
      const Timestamp t1 = imu[k + 1].t;
      while (fi < frames.size() && frames[fi].t == t0) {
        if (!processFrame(frames[fi++])) break;
      }
      Timestamp cur = t0;
      while (!out.diverged && fi < frames.size() && frames[fi].t < t1) {
        if (!step(imu[k], cur, frames[fi].t)) break;
        cur = frames[fi].t;
        if (!processFrame(frames[fi++])) break;
      }
      if (out.diverged) break;
      if (!step(imu[k], cur, t1)) break;
    }
    while (!out.diverged && fi < frames.size() &&
           frames[fi].t == imu.back().t) {
      if (!processFrame(frames[fi++])) break;
    }
  } catch (const std::exception& e) {
    fail(fi < frames.size() ? frames[fi].t : imu.back().t,
         std::string("filter failure: ") + e.what());
  }

  if (out.stats.nees_count > 0) out.stats.nees_mean /= out.stats.nees_count;
  out.final_state = fs;
  return out;
}

}  // namespace linevio
