/* Copyright 2026 The bevmot Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "bevmot/association.hpp"
#include "bevmot/core.hpp"
#include "bevmot/geometry.hpp"
#include "bevmot/motion.hpp"

namespace bevmot {

/// One tracked identity. `hits` counts successful matches (creation from a
/// detection is the first); `consecutive_misses` counts frames since the
/// last match. Ids are never reused within a run.
struct Track {
  int id = 0;
  KalmanState kf;
  OrientedBox3D box;
  int hits = 1;
  int consecutive_misses = 0;
  TrackStatus status = TrackStatus::kTentative;
  double last_score = 0.0;
};

struct TrackOutput {
  int frame_index = 0;
  int track_id = 0;
  OrientedBox3D box;
  double score = 0.0;
};

/// Score threshold, horizontal ROI cut, then rotated NMS. The result is
/// ordered score-descending.
inline FrameDetections filter_detections(const FrameDetections& frame,
                                         const TrackerConfig& cfg) {
  FrameDetections out;
  out.frame_index = frame.frame_index;
  out.timestamp = frame.timestamp;
  std::vector<Detection> kept;
  for (const Detection& det : frame.detections) {
    if (det.score < cfg.score_threshold) continue;
    if (horizontal_radius(det.box) > cfg.roi_radius) continue;
    kept.push_back(det);
  }
  out.detections = nms_rotated(kept, cfg.nms_iou_threshold);
  return out;
}

namespace detail {

/// Box published for a state: full box from a kFullBox10 state, or the
/// carried box with the filtered center for kCenter6.
inline OrientedBox3D state_box(const KalmanState& s,
                               const OrientedBox3D& carried) {
  if (s.layout == StateLayout::kCenter6) {
    OrientedBox3D box = carried;
    box.cx = s.mean(0);
    box.cy = s.mean(1);
    box.cz = s.mean(2);
    return box;
  }
  constexpr double kMinExtent = 1e-6;
  return OrientedBox3D(s.mean(0), s.mean(1), s.mean(2),
                       std::max(s.mean(3), kMinExtent),
                       std::max(s.mean(4), kMinExtent),
                       std::max(s.mean(5), kMinExtent), s.mean(6));
}

}  // namespace detail

/// Per-frame tracker state machine shared by both variants. Frames must be
/// stepped in increasing frame_index order; detections are expected to be
/// pre-filtered (see filter_detections / run_clip).
class TrackerRuntime {
 public:
  explicit TrackerRuntime(const TrackerConfig& cfg) : cfg_(cfg) {}

  const TrackerConfig& config() const { return cfg_; }
  const std::vector<Track>& live_tracks() const { return live_; }
  int next_id() const { return next_id_; }

  /// One predict / associate / update / manage cycle. Returns the outputs
  /// emitted for this frame (confirmed tracks matched this frame, plus
  /// coasting predictions when emit_coasted is set).
  std::vector<TrackOutput> step(const FrameDetections& frame) {
    if (frame.frame_index <= last_frame_index_) {
      throw std::runtime_error("step: frame indices must be increasing");
    }
    last_frame_index_ = frame.frame_index;
    const std::vector<Detection>& dets = frame.detections;
    const StateLayout layout = state_layout(cfg_.variant);

    // 1. Predict every live track one frame ahead.
    std::vector<OrientedBox3D> predicted_boxes;
    predicted_boxes.reserve(live_.size());
    for (Track& track : live_) {
      track.kf = kf_predict(track.kf, 1.0, cfg_);
      predicted_boxes.push_back(detail::state_box(track.kf, track.box));
    }

    // 2-3. Variant cost matrix, optimal assignment, then gating.
    CostMatrix cost;
    if (cfg_.variant == TrackerVariant::kAb3dmotStyle) {
      std::vector<KalmanState> states;
      states.reserve(live_.size());
      for (const Track& track : live_) states.push_back(track.kf);
      cost = mahalanobis_cost(states, dets, cfg_);
      apply_gate_mask(cost, predicted_boxes, dets, cfg_);
    } else {
      cost = iou_cost(predicted_boxes, dets, cfg_.association_iou_min);
    }
    const Assignment assignment =
        gate(hungarian_solve(cost), predicted_boxes, dets, cfg_);

    std::vector<char> matched_track(live_.size(), 0);
    std::vector<char> matched_det(dets.size(), 0);

    // 4. Update matched tracks.
    for (const Match& m : assignment.matches) {
      Track& track = live_[m.track_index];
      const Detection& det = dets[m.detection_index];
      matched_track[m.track_index] = 1;
      matched_det[m.detection_index] = 1;
      track.kf = kf_update(track.kf, det, cfg_);
      if (cfg_.variant == TrackerVariant::kAb3dmotStyle) {
        OrientedBox3D smoothed = ema_smooth(track.box, det.box, cfg_.ema_alpha);
        smoothed.cx = track.kf.mean(0);
        smoothed.cy = track.kf.mean(1);
        smoothed.cz = track.kf.mean(2);
        track.box = smoothed;
      } else {
        track.box = detail::state_box(track.kf, track.box);
      }
      track.hits += 1;
      track.consecutive_misses = 0;
      track.last_score = det.score;
    }

    // 5. Age unmatched tracks; drop the ones past max_age.
    std::vector<TrackOutput> coasted;
    for (std::size_t i = 0; i < live_.size(); ++i) {
      if (matched_track[i]) continue;
      Track& track = live_[i];
      track.consecutive_misses += 1;
      if (track.consecutive_misses > cfg_.max_age) {
        track.status = TrackStatus::kDead;
      } else if (cfg_.emit_coasted && track.status == TrackStatus::kConfirmed) {
        coasted.push_back({frame.frame_index, track.id,
                           detail::state_box(track.kf, track.box),
                           track.last_score});
      }
    }
    live_.erase(std::remove_if(live_.begin(), live_.end(),
                               [](const Track& t) {
                                 return t.status == TrackStatus::kDead;
                               }),
                live_.end());

    // 6. Unmatched detections become new tentative tracks.
    for (std::size_t j = 0; j < dets.size(); ++j) {
      if (matched_det[j]) continue;
      Track track;
      track.id = next_id_++;
      track.kf = kf_init(dets[j], layout, cfg_);
      track.box = dets[j].box;
      track.hits = 1;
      track.last_score = dets[j].score;
      live_.push_back(std::move(track));
    }

    // 7. Promote tracks that reached min_hits.
    for (Track& track : live_) {
      if (track.status == TrackStatus::kTentative && track.hits >= cfg_.min_hits) {
        track.status = TrackStatus::kConfirmed;
      }
    }

    // 8. Emit confirmed tracks that matched this frame (a birth counts as
    // its first match, so min_hits = 1 emits on the birth frame).
    std::vector<TrackOutput> outputs;
    for (const Track& track : live_) {
      if (track.status != TrackStatus::kConfirmed) continue;
      if (track.consecutive_misses != 0) continue;
      outputs.push_back({frame.frame_index, track.id, track.box, track.last_score});
    }
    std::sort(outputs.begin(), outputs.end(),
              [](const TrackOutput& a, const TrackOutput& b) {
                return a.track_id < b.track_id;
              });
    outputs.insert(outputs.end(), coasted.begin(), coasted.end());
    return outputs;
  }

 private:
  TrackerConfig cfg_;
  std::vector<Track> live_;
  int next_id_ = 1;
  long last_frame_index_ = -1;
};

/// Filters and tracks a whole clip on a fresh runtime. Deterministic for
/// identical inputs.
inline std::vector<TrackOutput> run_clip(const TrackerConfig& cfg,
                                         const SequenceClip& clip) {
  TrackerRuntime runtime(cfg);
  std::vector<TrackOutput> outputs;
  for (const FrameDetections& frame : clip.frames) {
    const std::vector<TrackOutput> frame_outputs =
        runtime.step(filter_detections(frame, cfg));
    outputs.insert(outputs.end(), frame_outputs.begin(), frame_outputs.end());
  }
  return outputs;
}

/// Assigns persistent ids to labeled boxes by running the chosen tracker
/// with score_threshold 0, min_hits 1 and max_age 3, so every labeled box
/// carries an id from its first frame. The result serves as tracking
/// pseudo ground truth.
inline std::vector<TrackOutput> generate_pseudo_gt(const SequenceClip& labels,
                                                   TrackerVariant variant) {
  TrackerConfig cfg = default_config(variant);
  cfg.score_threshold = 0.0;
  cfg.min_hits = 1;
  cfg.max_age = 3;
  return run_clip(cfg, labels);
}

}  // namespace bevmot
