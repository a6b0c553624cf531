#pragma once

#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "linevio/filter/srckf.hpp"
#include "linevio/geom/triangulation.hpp"

namespace linevio {

/// One tracked line segment detection in a camera frame.
struct LineTrack {
  Timestamp t = 0;
  std::int64_t id = 0;
  Vec2 a = Vec2::Zero();
  Vec2 b = Vec2::Zero();
};

struct LifecycleConfig {
  // A line unseen for miss_limit frames is removed; keeping the limit high
  // keeps landmarks resident across view gaps, so a line returning after a
  // long absence re-anchors the pose against its original estimate instead
  // of being re-triangulated from the (often degenerate) returning view.
  int max_lines = 20;          // landmark budget
  int miss_limit = 10000;      // frames a state line may go unseen
  double min_baseline = 0.5;   // m of camera travel before triangulation
  double sigma_init = 0.15;    // floor on a new line's endpoint sqrt uncertainty
  // Initialization is deferred while the predicted two-view triangulation
  // error exceeds this bound; more baseline shrinks it. Also keeps cubature
  // excursions (~ sqrt(aug dim) * sigma) small enough for the projection
  // model to stay locally valid.
  double sigma_init_max = 0.40;
};

/// Tracks candidate segments across frames, matches detections to state
/// lines, triangulates persistent candidates, and retires stale landmarks.
class LineManager {
 public:
  explicit LineManager(const LifecycleConfig& cfg = {}) : cfg_(cfg) {}

  struct FrameResult {
    MeasurementBatch batch;  // detections matched to state lines
    int augmented = 0;
    int removed = 0;
    int candidates = 0;  // buffer size after this frame
  };

  /// Ingests one frame of tracks; augments/removes lines on fs in place.
  FrameResult processFrame(FilterState& fs,
                           const std::vector<LineTrack>& tracks,
                           const CameraModel& cam, double sigma_px) {
    ++frame_;
    const Pose T_WC =
        Pose{fs.chi.rotation(), fs.chi.position()} * cam.T_IC;
    FrameResult out;
    out.batch.sigma_px = sigma_px;

    std::unordered_map<std::int64_t, bool> seen;
    for (const LineTrack& track : tracks) {
      seen[track.id] = true;
      if (fs.lineIndex(track.id) >= 0) {
        out.batch.lines.push_back({track.id, track.a, track.b});
        miss_[track.id] = 0;
        continue;
      }
      auto it = candidates_.find(track.id);
      if (it == candidates_.end()) {
        Candidate c;
        c.first.T_WC = T_WC;
        c.first.a = track.a;
        c.first.b = track.b;
        c.first_pose_std = positionStd(fs);
        c.last_frame = frame_;
        candidates_.emplace(track.id, c);
        continue;
      }
      Candidate& c = it->second;
      ++c.times_seen;
      c.last_frame = frame_;
      const double baseline = (T_WC.t - c.first.T_WC.t).norm();
      if (baseline < cfg_.min_baseline ||
          fs.numLines() >= cfg_.max_lines) {
        continue;
      }
      SegmentView now;
      now.T_WC = T_WC;
      now.a = track.a;
      now.b = track.b;
      try {
        const PluckerLine L = triangulateLine(cam, c.first, now);
        const LineEndpoints ends = endpointsFromPlucker(cam, L, now);
        const Pose T_CW = T_WC.inverse();
        if ((T_CW * ends.ps).z() <= 0.0 || (T_CW * ends.pe).z() <= 0.0) {
          continue;
        }
        // Measure the actual triangulation conditioning: re-run with each
        // image segment shifted and tilted by one pixel-noise sigma and
        // each camera center moved by that view's own position uncertainty,
        // taking the worst endpoint displacement. This catches not just
        // shallow baselines but the line-specific degeneracy where the 3D
        // line is nearly coplanar with the baseline and the two view planes
        // lose their intersection, and it charges new lines for the pose
        // drift they inherit from the estimate, which the diagonal init
        // cannot correlate away.
        const double sigma_tri = triangulationSensitivity(
            cam, c.first, now, ends, sigma_px, c.first_pose_std,
            positionStd(fs));
        const double sigma =
            sigma_tri > cfg_.sigma_init ? sigma_tri : cfg_.sigma_init;
        if (sigma > cfg_.sigma_init_max) continue;  // wait for more baseline
        fs = augmentLine(fs, track.id, ends, sigma, cfg_.max_lines);
      } catch (const std::domain_error&) {
        continue;  // poor geometry; keep waiting
      }
      miss_[track.id] = 0;
      candidates_.erase(it);
      ++out.augmented;
    }

    // Stale state lines: unseen for miss_limit consecutive frames.
    std::vector<std::int64_t> drop;
    for (std::int64_t id : fs.line_ids) {
      if (seen.count(id)) continue;
      if (++miss_[id] >= cfg_.miss_limit) drop.push_back(id);
    }
    for (std::int64_t id : drop) {
      fs = removeLine(fs, id);
      miss_.erase(id);
      ++out.removed;
    }

    // Candidates that stopped being tracked expire the same way.
    for (auto it = candidates_.begin(); it != candidates_.end();) {
      if (frame_ - it->second.last_frame >= cfg_.miss_limit) {
        it = candidates_.erase(it);
      } else {
        ++it;
      }
    }
    out.candidates = static_cast<int>(candidates_.size());
    return out;
  }

  const LifecycleConfig& config() const { return cfg_; }

 private:
  struct Candidate {
    SegmentView first;
    double first_pose_std = 0.0;  // position marginal when `first` was stored
    int times_seen = 1;
    long last_frame = 0;
  };

  static double positionStd(const FilterState& fs) {
    return std::sqrt(fs.S.block(6, 0, 3, 9).squaredNorm() / 3.0);
  }

  LifecycleConfig cfg_;
  std::unordered_map<std::int64_t, Candidate> candidates_;
  std::unordered_map<std::int64_t, int> miss_;
  long frame_ = 0;
};

}  // namespace linevio
