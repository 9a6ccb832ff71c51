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
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bevmot/association.hpp"
#include "bevmot/core.hpp"
#include "bevmot/geometry.hpp"
#include "bevmot/tracker.hpp"

namespace bevmot {

/// Cumulative detection metrics for targets within one radial slice.
struct DetectionMetricsRow {
  double radius = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double ap = 0.0;
  double miou = 0.0;
  long tp = 0;
  long fp = 0;
  long fn = 0;
};

/// CLEAR-MOT summary at one IoU threshold. MOTP is the mean matched IoU
/// (higher is better). MOTA can go negative.
struct MotMetrics {
  double iou_threshold = 0.0;
  double mota = 0.0;
  double motp = 0.0;
  double idf1 = 0.0;
  long fp = 0;
  long fn = 0;
  long idsw = 0;
  long gt_count = 0;
};

struct LatencyReport {
  double p50_ms = 0.0;
  double p90_ms = 0.0;
  long sample_count = 0;
};

/// One frame's prediction-to-GT matching, greedy in descending prediction
/// score (PASCAL style): each prediction takes the highest-IoU unmatched
/// GT box at or above iou_min. One-to-one.
struct DetectionMatches {
  std::vector<std::tuple<int, int, double>> matches;  // (pred, gt, iou)
  std::vector<int> unmatched_preds;
  std::vector<int> unmatched_gts;
};

inline DetectionMatches match_detections(const std::vector<Detection>& preds,
                                         const std::vector<OrientedBox3D>& gts,
                                         double iou_min) {
  DetectionMatches out;
  std::vector<int> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int l, int r) {
    return preds[l].score > preds[r].score;
  });
  std::vector<char> gt_taken(gts.size(), 0);
  std::vector<char> pred_matched(preds.size(), 0);
  for (int pi : order) {
    int best_gt = -1;
    double best_iou = 0.0;
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      if (gt_taken[gi]) continue;
      const double iou = rotated_bev_iou(preds[pi].box, gts[gi]);
      if (iou >= iou_min && iou > best_iou) {
        best_iou = iou;
        best_gt = static_cast<int>(gi);
      }
    }
    if (best_gt >= 0) {
      gt_taken[best_gt] = 1;
      pred_matched[pi] = 1;
      out.matches.emplace_back(pi, best_gt, best_iou);
    }
  }
  for (std::size_t pi = 0; pi < preds.size(); ++pi) {
    if (!pred_matched[pi]) out.unmatched_preds.push_back(static_cast<int>(pi));
  }
  for (std::size_t gi = 0; gi < gts.size(); ++gi) {
    if (!gt_taken[gi]) out.unmatched_gts.push_back(static_cast<int>(gi));
  }
  return out;
}

/// Area under the precision envelope of the score-ranked PR curve
/// (all-point interpolation). With no ground truth the value is 1 when
/// there are no predictions and 0 otherwise.
inline double average_precision(std::vector<std::pair<double, bool>> scored_flags,
                                long gt_count) {
  if (gt_count < 0) throw std::invalid_argument("average_precision: gt_count < 0");
  if (gt_count == 0) return scored_flags.empty() ? 1.0 : 0.0;
  std::stable_sort(scored_flags.begin(), scored_flags.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<double> precision, recall;
  long tp = 0, fp = 0;
  precision.reserve(scored_flags.size());
  recall.reserve(scored_flags.size());
  for (const auto& [score, is_tp] : scored_flags) {
    (void)score;
    is_tp ? ++tp : ++fp;
    precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
    recall.push_back(static_cast<double>(tp) / static_cast<double>(gt_count));
  }
  // Precision envelope: running maximum from the right.
  for (std::size_t k = precision.size(); k-- > 1;) {
    precision[k - 1] = std::max(precision[k - 1], precision[k]);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t k = 0; k < precision.size(); ++k) {
    ap += (recall[k] - prev_recall) * precision[k];
    prev_recall = recall[k];
  }
  return ap;
}

namespace detail {

inline void require_frame_aligned(const std::vector<FrameDetections>& preds,
                                  const std::vector<FrameDetections>& gts) {
  if (preds.size() != gts.size()) {
    throw std::runtime_error("detection_metrics_sliced: frame count mismatch");
  }
  for (std::size_t k = 0; k < preds.size(); ++k) {
    if (preds[k].frame_index != gts[k].frame_index) {
      throw std::runtime_error(
          "detection_metrics_sliced: frame index mismatch at position " +
          std::to_string(k));
    }
  }
}

}  // namespace detail

/// Cumulative distance-sliced detection metrics: for each radius, keep the
/// predictions and GT whose own horizontal center radius is within it,
/// match per frame, and pool counts, scores and matched IoUs.
inline std::vector<DetectionMetricsRow> detection_metrics_sliced(
    const std::vector<FrameDetections>& pred_frames,
    const std::vector<FrameDetections>& gt_frames, const EvalConfig& cfg) {
  detail::require_frame_aligned(pred_frames, gt_frames);
  std::vector<DetectionMetricsRow> rows;
  rows.reserve(cfg.radii.size());
  for (double radius : cfg.radii) {
    DetectionMetricsRow row;
    row.radius = radius;
    std::vector<std::pair<double, bool>> scored_flags;
    long gt_total = 0;
    double iou_sum = 0.0;
    for (std::size_t k = 0; k < pred_frames.size(); ++k) {
      std::vector<Detection> preds;
      for (const Detection& det : pred_frames[k].detections) {
        if (horizontal_radius(det.box) <= radius) preds.push_back(det);
      }
      std::vector<OrientedBox3D> gts;
      for (const Detection& gt : gt_frames[k].detections) {
        if (horizontal_radius(gt.box) <= radius) gts.push_back(gt.box);
      }
      gt_total += static_cast<long>(gts.size());
      const DetectionMatches matched = match_detections(preds, gts, cfg.tp_iou_min);
      row.tp += static_cast<long>(matched.matches.size());
      row.fp += static_cast<long>(matched.unmatched_preds.size());
      row.fn += static_cast<long>(matched.unmatched_gts.size());
      std::vector<char> is_tp(preds.size(), 0);
      for (const auto& [pi, gi, iou] : matched.matches) {
        (void)gi;
        is_tp[pi] = 1;
        iou_sum += iou;
      }
      for (std::size_t pi = 0; pi < preds.size(); ++pi) {
        scored_flags.emplace_back(preds[pi].score, static_cast<bool>(is_tp[pi]));
      }
    }
    row.precision = row.tp + row.fp > 0
                        ? static_cast<double>(row.tp) / static_cast<double>(row.tp + row.fp)
                        : 1.0;
    row.recall = row.tp + row.fn > 0
                     ? static_cast<double>(row.tp) / static_cast<double>(row.tp + row.fn)
                     : 1.0;
    row.f1 = row.precision + row.recall > 0.0
                 ? 2.0 * row.precision * row.recall / (row.precision + row.recall)
                 : 0.0;
    row.ap = average_precision(std::move(scored_flags), gt_total);
    row.miou = row.tp > 0 ? iou_sum / static_cast<double>(row.tp) : 0.0;
    rows.push_back(row);
  }
  return rows;
}

/// One operating point of the score-ranked precision/recall curve.
struct PrPoint {
  double score = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

/// Per-radius PR curve points under the same slicing and matching protocol
/// as detection_metrics_sliced (for external plotting).
inline std::vector<std::vector<PrPoint>> pr_curves(
    const std::vector<FrameDetections>& pred_frames,
    const std::vector<FrameDetections>& gt_frames, const EvalConfig& cfg) {
  detail::require_frame_aligned(pred_frames, gt_frames);
  std::vector<std::vector<PrPoint>> curves;
  for (double radius : cfg.radii) {
    std::vector<std::pair<double, bool>> flags;
    long gt_total = 0;
    for (std::size_t k = 0; k < pred_frames.size(); ++k) {
      std::vector<Detection> preds;
      for (const Detection& det : pred_frames[k].detections) {
        if (horizontal_radius(det.box) <= radius) preds.push_back(det);
      }
      std::vector<OrientedBox3D> gts;
      for (const Detection& gt : gt_frames[k].detections) {
        if (horizontal_radius(gt.box) <= radius) gts.push_back(gt.box);
      }
      gt_total += static_cast<long>(gts.size());
      const DetectionMatches matched = match_detections(preds, gts, cfg.tp_iou_min);
      std::vector<char> is_tp(preds.size(), 0);
      for (const auto& [pi, gi, iou] : matched.matches) {
        (void)gi;
        (void)iou;
        is_tp[pi] = 1;
      }
      for (std::size_t pi = 0; pi < preds.size(); ++pi) {
        flags.emplace_back(preds[pi].score, static_cast<bool>(is_tp[pi]));
      }
    }
    std::stable_sort(flags.begin(), flags.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<PrPoint> curve;
    long tp = 0, fp = 0;
    for (const auto& [score, hit] : flags) {
      hit ? ++tp : ++fp;
      curve.push_back({score,
                       static_cast<double>(tp) / static_cast<double>(tp + fp),
                       gt_total > 0 ? static_cast<double>(tp) / static_cast<double>(gt_total)
                                    : 0.0});
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

namespace detail {

struct FrameBoxes {
  std::vector<int> ids;
  std::vector<OrientedBox3D> boxes;
};

inline std::map<int, FrameBoxes> by_frame(const std::vector<TrackOutput>& seq) {
  std::map<int, FrameBoxes> frames;
  for (const TrackOutput& out : seq) {
    frames[out.frame_index].ids.push_back(out.track_id);
    frames[out.frame_index].boxes.push_back(out.box);
  }
  return frames;
}

}  // namespace detail

/// CLEAR-MOT accumulation. Per frame, previous-frame correspondences still
/// valid at the IoU threshold are kept; the remaining pairs are matched by
/// Hungarian assignment maximizing IoU. An identity switch is a GT whose
/// matched prediction id differs from its most recent matched id.
inline MotMetrics clear_mot(const std::vector<TrackOutput>& pred,
                            const std::vector<TrackOutput>& gt,
                            double iou_threshold) {
  MotMetrics metrics;
  metrics.iou_threshold = iou_threshold;
  const std::map<int, detail::FrameBoxes> pred_frames = detail::by_frame(pred);
  const std::map<int, detail::FrameBoxes> gt_frames = detail::by_frame(gt);

  std::vector<int> frame_indices;
  for (const auto& [frame, boxes] : pred_frames) frame_indices.push_back(frame);
  for (const auto& [frame, boxes] : gt_frames) frame_indices.push_back(frame);
  std::sort(frame_indices.begin(), frame_indices.end());
  frame_indices.erase(std::unique(frame_indices.begin(), frame_indices.end()),
                      frame_indices.end());

  std::map<int, int> correspondence;   // gt id -> pred id, persists over gaps
  std::map<int, int> last_matched_id;  // gt id -> most recent matched pred id
  double iou_sum = 0.0;
  long match_count = 0;
  static const detail::FrameBoxes kEmpty;

  for (int frame : frame_indices) {
    const auto pit = pred_frames.find(frame);
    const auto git = gt_frames.find(frame);
    const detail::FrameBoxes& preds = pit != pred_frames.end() ? pit->second : kEmpty;
    const detail::FrameBoxes& gts = git != gt_frames.end() ? git->second : kEmpty;
    metrics.gt_count += static_cast<long>(gts.ids.size());

    std::vector<char> pred_used(preds.ids.size(), 0);
    std::vector<char> gt_used(gts.ids.size(), 0);
    std::vector<std::pair<int, int>> frame_matches;  // (gt slot, pred slot)

    // Keep surviving correspondences first.
    for (std::size_t g = 0; g < gts.ids.size(); ++g) {
      const auto corr = correspondence.find(gts.ids[g]);
      if (corr == correspondence.end()) continue;
      for (std::size_t p = 0; p < preds.ids.size(); ++p) {
        if (pred_used[p] || preds.ids[p] != corr->second) continue;
        const double iou = rotated_bev_iou(preds.boxes[p], gts.boxes[g]);
        if (iou >= iou_threshold) {
          pred_used[p] = 1;
          gt_used[g] = 1;
          frame_matches.emplace_back(static_cast<int>(g), static_cast<int>(p));
          iou_sum += iou;
          ++match_count;
        }
        break;
      }
    }

    // Hungarian on the rest, maximizing IoU subject to the threshold.
    std::vector<int> free_gts, free_preds;
    for (std::size_t g = 0; g < gts.ids.size(); ++g) {
      if (!gt_used[g]) free_gts.push_back(static_cast<int>(g));
    }
    for (std::size_t p = 0; p < preds.ids.size(); ++p) {
      if (!pred_used[p]) free_preds.push_back(static_cast<int>(p));
    }
    if (!free_gts.empty() && !free_preds.empty()) {
      CostMatrix cost(static_cast<int>(free_gts.size()),
                      static_cast<int>(free_preds.size()), CostKind::kOneMinusIou);
      for (int a = 0; a < cost.rows; ++a) {
        for (int b = 0; b < cost.cols; ++b) {
          const double iou =
              rotated_bev_iou(gts.boxes[free_gts[a]], preds.boxes[free_preds[b]]);
          cost.at(a, b) = iou < iou_threshold ? CostMatrix::kInfeasible : 1.0 - iou;
        }
      }
      for (const Match& m : hungarian_solve(cost).matches) {
        const int g = free_gts[m.track_index];
        const int p = free_preds[m.detection_index];
        gt_used[g] = 1;
        pred_used[p] = 1;
        frame_matches.emplace_back(g, p);
        iou_sum += 1.0 - m.cost;
        ++match_count;
      }
    }

    for (const auto& [g, p] : frame_matches) {
      const int gt_id = gts.ids[g];
      const int pred_id = preds.ids[p];
      const auto last = last_matched_id.find(gt_id);
      if (last != last_matched_id.end() && last->second != pred_id) {
        metrics.idsw += 1;
      }
      last_matched_id[gt_id] = pred_id;
      correspondence[gt_id] = pred_id;
    }
    for (std::size_t g = 0; g < gts.ids.size(); ++g) {
      if (!gt_used[g]) metrics.fn += 1;
    }
    for (std::size_t p = 0; p < preds.ids.size(); ++p) {
      if (!pred_used[p]) metrics.fp += 1;
    }
  }

  metrics.motp = match_count > 0 ? iou_sum / static_cast<double>(match_count) : 0.0;
  if (metrics.gt_count > 0) {
    metrics.mota = 1.0 - static_cast<double>(metrics.fn + metrics.fp + metrics.idsw) /
                             static_cast<double>(metrics.gt_count);
  } else {
    metrics.mota = metrics.fp + metrics.idsw == 0 ? 1.0 : 0.0;
  }
  return metrics;
}

/// Identification F1: a global one-to-one pairing of GT ids with
/// prediction ids maximizing the number of frames where the paired boxes
/// overlap at the threshold. IDF1 = 2 IDTP / (2 IDTP + IDFP + IDFN).
inline double idf1(const std::vector<TrackOutput>& pred,
                   const std::vector<TrackOutput>& gt, double iou_threshold) {
  // Per-id, per-frame boxes.
  std::map<int, std::map<int, OrientedBox3D>> gt_tracks, pred_tracks;
  for (const TrackOutput& out : gt) gt_tracks[out.track_id][out.frame_index] = out.box;
  for (const TrackOutput& out : pred) pred_tracks[out.track_id][out.frame_index] = out.box;

  long gt_frames = static_cast<long>(gt.size());
  long pred_frames = static_cast<long>(pred.size());

  std::vector<const std::map<int, OrientedBox3D>*> gt_list, pred_list;
  for (const auto& [id, track] : gt_tracks) gt_list.push_back(&track);
  for (const auto& [id, track] : pred_tracks) pred_list.push_back(&track);

  long idtp = 0;
  if (!gt_list.empty() && !pred_list.empty()) {
    Eigen::MatrixXd benefit(gt_list.size(), pred_list.size());
    double max_benefit = 0.0;
    for (std::size_t a = 0; a < gt_list.size(); ++a) {
      for (std::size_t b = 0; b < pred_list.size(); ++b) {
        long overlap_frames = 0;
        for (const auto& [frame, box] : *gt_list[a]) {
          const auto hit = pred_list[b]->find(frame);
          if (hit != pred_list[b]->end() &&
              rotated_bev_iou(box, hit->second) >= iou_threshold) {
            ++overlap_frames;
          }
        }
        benefit(a, b) = static_cast<double>(overlap_frames);
        max_benefit = std::max(max_benefit, benefit(a, b));
      }
    }
    CostMatrix cost(static_cast<int>(gt_list.size()),
                    static_cast<int>(pred_list.size()), CostKind::kOneMinusIou);
    for (int a = 0; a < cost.rows; ++a) {
      for (int b = 0; b < cost.cols; ++b) {
        cost.at(a, b) = max_benefit - benefit(a, b);
      }
    }
    for (const Match& m : hungarian_solve(cost).matches) {
      idtp += static_cast<long>(benefit(m.track_index, m.detection_index));
    }
  }
  const long idfp = pred_frames - idtp;
  const long idfn = gt_frames - idtp;
  const long denom = 2 * idtp + idfp + idfn;
  return denom > 0 ? 2.0 * static_cast<double>(idtp) / static_cast<double>(denom)
                   : 1.0;
}

/// CLEAR-MOT metrics plus IDF1 in one record.
inline MotMetrics evaluate_mot(const std::vector<TrackOutput>& pred,
                               const std::vector<TrackOutput>& gt,
                               double iou_threshold) {
  MotMetrics metrics = clear_mot(pred, gt, iou_threshold);
  metrics.idf1 = idf1(pred, gt, iou_threshold);
  return metrics;
}

/// Nearest-rank percentiles: the sorted sample at 1-based index
/// ceil(q * n).
inline LatencyReport latency_percentiles(std::vector<double> samples_ms) {
  if (samples_ms.empty()) {
    throw std::invalid_argument("latency_percentiles: no samples");
  }
  std::sort(samples_ms.begin(), samples_ms.end());
  const auto nearest_rank = [&](double q) {
    const std::size_t rank = static_cast<std::size_t>(
        std::ceil(q * static_cast<double>(samples_ms.size())));
    return samples_ms[std::max<std::size_t>(rank, 1) - 1];
  };
  LatencyReport report;
  report.p50_ms = nearest_rank(0.50);
  report.p90_ms = nearest_rank(0.90);
  report.sample_count = static_cast<long>(samples_ms.size());
  return report;
}

}  // namespace bevmot
