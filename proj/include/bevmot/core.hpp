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
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bevmot {

inline constexpr double kPi = std::numbers::pi;

/// Wraps an angle into [-pi, pi). Rejects non-finite input.
inline double normalize_yaw(double angle) {
  if (!std::isfinite(angle)) {
    throw std::invalid_argument("normalize_yaw: angle must be finite");
  }
  double wrapped = std::remainder(angle, 2.0 * kPi);  // [-pi, pi]
  if (wrapped >= kPi) wrapped -= 2.0 * kPi;
  return wrapped;
}

/// A 3D box in the LiDAR frame (z up). dx is the extent along the yaw
/// heading, dy the lateral extent, dz the vertical extent; yaw is the
/// rotation about +z measured from +x and is kept in [-pi, pi).
struct OrientedBox3D {
  double cx = 0.0, cy = 0.0, cz = 0.0;
  double dx = 1.0, dy = 1.0, dz = 1.0;
  double yaw = 0.0;

  OrientedBox3D() = default;
  OrientedBox3D(double cx_, double cy_, double cz_, double dx_, double dy_,
                double dz_, double yaw_)
      : cx(cx_), cy(cy_), cz(cz_), dx(dx_), dy(dy_), dz(dz_),
        yaw(normalize_yaw(yaw_)) {
    if (!std::isfinite(cx) || !std::isfinite(cy) || !std::isfinite(cz)) {
      throw std::invalid_argument("OrientedBox3D: non-finite center");
    }
    if (!std::isfinite(dx) || !std::isfinite(dy) || !std::isfinite(dz) ||
        dx <= 0.0 || dy <= 0.0 || dz <= 0.0) {
      throw std::invalid_argument(
          "OrientedBox3D: extents must be positive and finite");
    }
  }
};

enum class ClassId { kPerson = 0 };

/// A scored per-frame detection. Scores are clamped to [0, 1] rather than
/// rejected; upstream detectors occasionally emit logits, and the file
/// loader warns when it clamps.
struct Detection {
  OrientedBox3D box;
  ClassId class_id = ClassId::kPerson;
  double score = 1.0;

  Detection() = default;
  Detection(const OrientedBox3D& b, ClassId c, double s)
      : box(b), class_id(c), score(std::clamp(s, 0.0, 1.0)) {
    if (!std::isfinite(s)) {
      throw std::invalid_argument("Detection: non-finite score");
    }
  }
};

/// Detections of one frame. Frame indices are strictly increasing within a
/// clip; the timestamp is metadata (the tracker steps in whole frames).
struct FrameDetections {
  int frame_index = 0;
  double timestamp = 0.0;
  std::vector<Detection> detections;
};

/// An ordered run of frames recorded at a fixed rate.
struct SequenceClip {
  std::string clip_id;
  double rate_hz = 3.0;
  std::vector<FrameDetections> frames;
};

enum class TrackerVariant { kAb3dmotStyle, kSimpleTrackStyle };
enum class TrackStatus { kTentative, kConfirmed, kDead };

/// Runtime knobs for both tracker variants. Kalman noise terms use
/// per-frame units (the clip rate only matters when interpreting
/// velocities in physical units).
struct TrackerConfig {
  TrackerVariant variant = TrackerVariant::kAb3dmotStyle;
  double score_threshold = 0.45;
  double nms_iou_threshold = 0.30;
  double roi_radius = 4.5;      // meters, horizontal
  int min_hits = 2;
  int max_age = 3;
  double ema_alpha = 0.5;       // box size/yaw smoothing (AB3DMOT variant)
  double mahalanobis_gate = 9.4877;
  double association_iou_min = 0.01;  // 0.01 secondary cue / 0.10 SimpleTrack
  bool emit_coasted = false;

  // Kalman filter noise, exposed so tuning never needs a rebuild.
  double q_position = 0.01;   // process noise, m^2
  double q_velocity = 0.01;   // (m/frame)^2
  double q_size = 1e-4;       // m^2 (full-box state only)
  double q_yaw = 1e-4;        // rad^2 (full-box state only)
  double r_position = 0.01;   // measurement noise, m^2
  double r_size = 0.01;       // m^2
  double r_yaw = 0.04;        // rad^2
  double p0_measured = 1.0;   // initial variance of measured components
  double p0_velocity = 10.0;  // uninformative velocity prior
};

inline TrackerConfig default_config(TrackerVariant variant) {
  TrackerConfig cfg;
  cfg.variant = variant;
  cfg.association_iou_min =
      variant == TrackerVariant::kSimpleTrackStyle ? 0.10 : 0.01;
  return cfg;
}

inline std::string variant_name(TrackerVariant variant) {
  return variant == TrackerVariant::kAb3dmotStyle ? "ab3dmot" : "simpletrack";
}

inline TrackerVariant parse_variant(std::string_view name) {
  if (name == "ab3dmot") return TrackerVariant::kAb3dmotStyle;
  if (name == "simpletrack") return TrackerVariant::kSimpleTrackStyle;
  throw std::runtime_error("unknown variant '" + std::string(name) +
                           "' (expected ab3dmot or simpletrack)");
}

/// Mounting geometry of the overhead sensor plus a person-sized prior box.
struct SensorGeometry {
  double mount_height = 2.94;  // meters above ground
  std::array<double, 3> default_person_extent{0.8, 0.6, 1.73};
};

/// Evaluation protocol: TP rule, cumulative distance slices, MOT thresholds.
struct EvalConfig {
  double tp_iou_min = 0.10;
  std::vector<double> radii{1.0, 2.0, 3.0, 4.0, 5.0};
  std::vector<double> mot_iou_thresholds{0.3, 0.1};
};

}  // namespace bevmot
