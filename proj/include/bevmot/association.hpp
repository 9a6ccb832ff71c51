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

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "bevmot/core.hpp"
#include "bevmot/geometry.hpp"
#include "bevmot/motion.hpp"

namespace bevmot {

enum class CostKind { kMahalanobis, kOneMinusIou };

/// Dense track-by-detection cost matrix; lower is better. Entries that
/// must never be matched carry the kInfeasible sentinel.
struct CostMatrix {
  int rows = 0;
  int cols = 0;
  CostKind kind = CostKind::kMahalanobis;
  std::vector<double> values;  // row-major

  static constexpr double kInfeasible = std::numeric_limits<double>::infinity();

  CostMatrix() = default;
  CostMatrix(int r, int c, CostKind k)
      : rows(r), cols(c), kind(k), values(static_cast<std::size_t>(r) * c, 0.0) {}

  double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
  double& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
};

struct Match {
  int track_index = -1;
  int detection_index = -1;
  double cost = 0.0;
};

/// A partition of tracks and detections into matched pairs and leftovers.
struct Assignment {
  std::vector<Match> matches;
  std::vector<int> unmatched_tracks;
  std::vector<int> unmatched_detections;
};

/// Mahalanobis distance sqrt(v^T S^-1 v) between each predicted track
/// center and each detected center, with S the track's innovation
/// covariance. kCenter6 states only.
inline CostMatrix mahalanobis_cost(const std::vector<KalmanState>& tracks,
                                   const std::vector<Detection>& dets,
                                   const TrackerConfig& cfg) {
  CostMatrix cost(static_cast<int>(tracks.size()), static_cast<int>(dets.size()),
                  CostKind::kMahalanobis);
  for (int i = 0; i < cost.rows; ++i) {
    const KalmanState& s = tracks[i];
    const Eigen::Matrix3d innovation_cov =
        innovation_covariance(s, cfg).topLeftCorner<3, 3>();
    Eigen::LLT<Eigen::Matrix3d> llt(innovation_cov);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error(
          "mahalanobis_cost: singular innovation covariance");
    }
    for (int j = 0; j < cost.cols; ++j) {
      const Eigen::Vector3d nu(dets[j].box.cx - s.mean(0),
                               dets[j].box.cy - s.mean(1),
                               dets[j].box.cz - s.mean(2));
      cost.at(i, j) = std::sqrt(nu.dot(llt.solve(nu)));
    }
  }
  return cost;
}

/// 1 - rotated BEV IoU between predicted track boxes and detections.
/// Pairs below iou_min are infeasible (fixed-overlap-threshold gating).
inline CostMatrix iou_cost(const std::vector<OrientedBox3D>& track_boxes,
                           const std::vector<Detection>& dets, double iou_min) {
  CostMatrix cost(static_cast<int>(track_boxes.size()),
                  static_cast<int>(dets.size()), CostKind::kOneMinusIou);
  for (int i = 0; i < cost.rows; ++i) {
    for (int j = 0; j < cost.cols; ++j) {
      const double iou = rotated_bev_iou(track_boxes[i], dets[j].box);
      cost.at(i, j) = iou < iou_min ? CostMatrix::kInfeasible : 1.0 - iou;
    }
  }
  return cost;
}

namespace detail {

/// Minimum-cost perfect matching on a dense square matrix via shortest
/// augmenting paths with potentials (Jonker-Volkenant style). Writes the
/// column matched to each row and returns the total cost. Deterministic.
inline double assign_square(const std::vector<double>& cost, int n,
                            std::vector<int>& col_of_row) {
  constexpr double kInf = std::numeric_limits<double>::max();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur =
            cost[static_cast<std::size_t>(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  col_of_row.assign(n, -1);
  double total = 0.0;
  for (int j = 1; j <= n; ++j) {
    if (p[j] != 0) col_of_row[p[j] - 1] = j - 1;
  }
  for (int i = 0; i < n; ++i) {
    total += cost[static_cast<std::size_t>(i) * n + col_of_row[i]];
  }
  return total;
}

/// Helper for the lexicographic refinement: optimal total over a padded
/// square matrix restricted to the still-active rows and columns.
inline double assign_subproblem(const std::vector<double>& padded, int n,
                                const std::vector<int>& rows_left,
                                const std::vector<int>& cols_left) {
  const int k = static_cast<int>(rows_left.size());
  if (k == 0) return 0.0;
  std::vector<double> sub(static_cast<std::size_t>(k) * k);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      sub[static_cast<std::size_t>(a) * k + b] =
          padded[static_cast<std::size_t>(rows_left[a]) * n + cols_left[b]];
    }
  }
  std::vector<int> ignore;
  return assign_square(sub, k, ignore);
}

}  // namespace detail

/// Minimum-total-cost assignment over the feasible entries. Rectangular
/// matrices leave the surplus side unmatched and infeasible entries are
/// never matched (internally they are padded with a cost exceeding any
/// feasible total and filtered afterwards, which also maximizes the
/// number of feasible matches). Ties between optima resolve to the
/// lexicographically smallest match set.
inline Assignment hungarian_solve(const CostMatrix& c) {
  Assignment out;
  const int rows = c.rows;
  const int cols = c.cols;
  if (rows == 0 || cols == 0) {
    for (int i = 0; i < rows; ++i) out.unmatched_tracks.push_back(i);
    for (int j = 0; j < cols; ++j) out.unmatched_detections.push_back(j);
    return out;
  }

  double max_finite = 0.0;
  for (double value : c.values) {
    if (std::isfinite(value)) max_finite = std::max(max_finite, std::abs(value));
  }
  const int n = std::max(rows, cols);
  const double big = (max_finite + 1.0) * (n + 1.0);

  // Square padding: dummy rows/cols cost 0, infeasible entries cost `big`.
  std::vector<double> padded(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double value = c.at(i, j);
      padded[static_cast<std::size_t>(i) * n + j] =
          std::isfinite(value) ? value : big;
    }
  }

  std::vector<int> col_of_row;
  const double optimum = detail::assign_square(padded, n, col_of_row);
  const double eps = 1e-9 * std::max(1.0, std::abs(optimum));

  // Fix matches row by row, lowest feasible column first, keeping only
  // choices that still complete to the optimal total.
  std::vector<int> rows_left(n), cols_left(n);
  std::iota(rows_left.begin(), rows_left.end(), 0);
  std::iota(cols_left.begin(), cols_left.end(), 0);
  double fixed_total = 0.0;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      if (!std::isfinite(c.at(i, j))) continue;
      const auto col_it = std::find(cols_left.begin(), cols_left.end(), j);
      if (col_it == cols_left.end()) continue;
      std::vector<int> rows_rest(rows_left.begin(), rows_left.end());
      rows_rest.erase(std::find(rows_rest.begin(), rows_rest.end(), i));
      std::vector<int> cols_rest(cols_left.begin(), cols_left.end());
      cols_rest.erase(std::find(cols_rest.begin(), cols_rest.end(), j));
      const double rest =
          detail::assign_subproblem(padded, n, rows_rest, cols_rest);
      if (fixed_total + c.at(i, j) + rest <= optimum + eps) {
        out.matches.push_back({i, j, c.at(i, j)});
        fixed_total += c.at(i, j);
        rows_left.erase(std::find(rows_left.begin(), rows_left.end(), i));
        cols_left.erase(std::find(cols_left.begin(), cols_left.end(), j));
        break;
      }
    }
  }

  std::vector<char> row_matched(rows, 0), col_matched(cols, 0);
  for (const Match& m : out.matches) {
    row_matched[m.track_index] = 1;
    col_matched[m.detection_index] = 1;
  }
  for (int i = 0; i < rows; ++i) {
    if (!row_matched[i]) out.unmatched_tracks.push_back(i);
  }
  for (int j = 0; j < cols; ++j) {
    if (!col_matched[j]) out.unmatched_detections.push_back(j);
  }
  return out;
}

/// Marks pairs that could never survive the gate as infeasible so the
/// solver cannot spend a match on them. Without this, a freshly spawned
/// track with its wide covariance underbids every converged track for
/// whatever detection lies nearest and the demoted pair fragments a real
/// identity.
inline void apply_gate_mask(CostMatrix& cost,
                            const std::vector<OrientedBox3D>& track_boxes,
                            const std::vector<Detection>& dets,
                            const TrackerConfig& cfg) {
  for (int i = 0; i < cost.rows; ++i) {
    for (int j = 0; j < cost.cols; ++j) {
      double& value = cost.at(i, j);
      if (!std::isfinite(value)) continue;
      if (cost.kind == CostKind::kMahalanobis && value > cfg.mahalanobis_gate) {
        value = CostMatrix::kInfeasible;
        continue;
      }
      if (rotated_bev_iou(track_boxes[i], dets[j].box) < cfg.association_iou_min) {
        value = CostMatrix::kInfeasible;
      }
    }
  }
}

/// Post-assignment gate. AB3DMOT variant: a match survives only if its
/// Mahalanobis cost is within the gate AND the predicted/detected boxes
/// overlap at least association_iou_min in BEV (the secondary geometric
/// cue). SimpleTrack variant: the overlap threshold alone. Demoted pairs
/// return to the unmatched sets; gating never creates matches.
inline Assignment gate(const Assignment& a,
                       const std::vector<OrientedBox3D>& track_boxes,
                       const std::vector<Detection>& dets,
                       const TrackerConfig& cfg) {
  Assignment out;
  out.unmatched_tracks = a.unmatched_tracks;
  out.unmatched_detections = a.unmatched_detections;
  for (const Match& m : a.matches) {
    const double iou =
        rotated_bev_iou(track_boxes[m.track_index], dets[m.detection_index].box);
    bool keep = iou >= cfg.association_iou_min;
    if (cfg.variant == TrackerVariant::kAb3dmotStyle) {
      keep = keep && m.cost <= cfg.mahalanobis_gate;
    }
    if (keep) {
      out.matches.push_back(m);
    } else {
      out.unmatched_tracks.push_back(m.track_index);
      out.unmatched_detections.push_back(m.detection_index);
    }
  }
  std::sort(out.unmatched_tracks.begin(), out.unmatched_tracks.end());
  std::sort(out.unmatched_detections.begin(), out.unmatched_detections.end());
  return out;
}

}  // namespace bevmot
