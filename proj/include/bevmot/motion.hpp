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
#include <cmath>
#include <stdexcept>

#include "bevmot/core.hpp"

namespace bevmot {

/// Two constant-velocity state layouts:
///   kCenter6   = [cx, cy, cz, vx, vy, vz]; the box center is the
///                measurement, size and yaw live outside the filter.
///   kFullBox10 = [cx, cy, cz, dx, dy, dz, yaw, vx, vy, vz]; the full box
///                is the measurement.
/// Velocities are per frame.
enum class StateLayout { kCenter6, kFullBox10 };

inline StateLayout state_layout(TrackerVariant variant) {
  return variant == TrackerVariant::kAb3dmotStyle ? StateLayout::kCenter6
                                                  : StateLayout::kFullBox10;
}

struct KalmanState {
  StateLayout layout = StateLayout::kCenter6;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;

  int dim() const { return layout == StateLayout::kCenter6 ? 6 : 10; }
  int measured_dim() const { return layout == StateLayout::kCenter6 ? 3 : 7; }
  int velocity_offset() const { return dim() - 3; }
};

namespace detail {

inline void symmetrize(Eigen::MatrixXd& m) {
  m = 0.5 * (m + m.transpose()).eval();
}

inline Eigen::MatrixXd process_noise(const KalmanState& s,
                                     const TrackerConfig& cfg) {
  Eigen::VectorXd q(s.dim());
  q.head<3>().setConstant(cfg.q_position);
  if (s.layout == StateLayout::kFullBox10) {
    q.segment<3>(3).setConstant(cfg.q_size);
    q(6) = cfg.q_yaw;
  }
  q.tail<3>().setConstant(cfg.q_velocity);
  return q.asDiagonal();
}

inline Eigen::MatrixXd measurement_noise(const KalmanState& s,
                                         const TrackerConfig& cfg) {
  Eigen::VectorXd r(s.measured_dim());
  r.head<3>().setConstant(cfg.r_position);
  if (s.layout == StateLayout::kFullBox10) {
    r.segment<3>(3).setConstant(cfg.r_size);
    r(6) = cfg.r_yaw;
  }
  return r.asDiagonal();
}

}  // namespace detail

/// New state centered on a detection, with zero velocity and the
/// configured initial covariance.
inline KalmanState kf_init(const Detection& det, StateLayout layout,
                           const TrackerConfig& cfg) {
  KalmanState s;
  s.layout = layout;
  const int n = s.dim();
  s.mean = Eigen::VectorXd::Zero(n);
  s.mean(0) = det.box.cx;
  s.mean(1) = det.box.cy;
  s.mean(2) = det.box.cz;
  if (layout == StateLayout::kFullBox10) {
    s.mean(3) = det.box.dx;
    s.mean(4) = det.box.dy;
    s.mean(5) = det.box.dz;
    s.mean(6) = det.box.yaw;
  }
  Eigen::VectorXd p0(n);
  p0.setConstant(cfg.p0_measured);
  p0.tail<3>().setConstant(cfg.p0_velocity);
  s.covariance = p0.asDiagonal();
  return s;
}

/// Constant-velocity prediction: position += velocity * dt, size and yaw
/// carried through, covariance propagated as F P F^T + Q.
inline KalmanState kf_predict(const KalmanState& s, double dt,
                              const TrackerConfig& cfg) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("kf_predict: dt must be positive");
  }
  const int n = s.dim();
  const int v = s.velocity_offset();
  Eigen::MatrixXd f = Eigen::MatrixXd::Identity(n, n);
  for (int k = 0; k < 3; ++k) f(k, v + k) = dt;
  KalmanState out = s;
  out.mean = f * s.mean;
  if (s.layout == StateLayout::kFullBox10) out.mean(6) = normalize_yaw(out.mean(6));
  out.covariance = f * s.covariance * f.transpose() + detail::process_noise(s, cfg);
  detail::symmetrize(out.covariance);
  return out;
}

/// Yaw innovation with front/back disambiguation: residuals beyond pi/2
/// are treated as a flipped box (persons have no reliable heading in
/// sparse overhead returns), so the result always lies in [-pi/2, pi/2].
inline double yaw_residual(double predicted_yaw, double measured_yaw) {
  double res = normalize_yaw(measured_yaw - predicted_yaw);
  if (std::abs(res) > 0.5 * kPi) res = normalize_yaw(res + kPi);
  return res;
}

/// Linear Kalman update against a detection. The measurement is the box
/// center (kCenter6) or the full box with yaw innovation via yaw_residual
/// (kFullBox10). Uses the Joseph form so the posterior covariance stays
/// positive semidefinite.
inline KalmanState kf_update(const KalmanState& s, const Detection& det,
                             const TrackerConfig& cfg) {
  const int n = s.dim();
  const int m = s.measured_dim();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, n);
  for (int k = 0; k < m; ++k) h(k, k) = 1.0;

  Eigen::VectorXd innovation(m);
  innovation(0) = det.box.cx - s.mean(0);
  innovation(1) = det.box.cy - s.mean(1);
  innovation(2) = det.box.cz - s.mean(2);
  if (s.layout == StateLayout::kFullBox10) {
    innovation(3) = det.box.dx - s.mean(3);
    innovation(4) = det.box.dy - s.mean(4);
    innovation(5) = det.box.dz - s.mean(5);
    innovation(6) = yaw_residual(s.mean(6), det.box.yaw);
  }

  const Eigen::MatrixXd r = detail::measurement_noise(s, cfg);
  Eigen::MatrixXd innovation_cov = h * s.covariance * h.transpose() + r;
  detail::symmetrize(innovation_cov);
  Eigen::LLT<Eigen::MatrixXd> llt(innovation_cov);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error(
        "kf_update: singular innovation covariance; check measurement noise");
  }
  // K = P H^T S^-1, computed as (S^-1 (H P))^T since S and P are symmetric.
  const Eigen::MatrixXd gain = llt.solve(h * s.covariance).transpose();

  KalmanState out = s;
  out.mean = s.mean + gain * innovation;
  if (s.layout == StateLayout::kFullBox10) out.mean(6) = normalize_yaw(out.mean(6));
  const Eigen::MatrixXd ikh = Eigen::MatrixXd::Identity(n, n) - gain * h;
  out.covariance = ikh * s.covariance * ikh.transpose() +
                   gain * r * gain.transpose();
  detail::symmetrize(out.covariance);
  return out;
}

/// Innovation covariance of the state's measured block (used for
/// Mahalanobis association costs).
inline Eigen::MatrixXd innovation_covariance(const KalmanState& s,
                                             const TrackerConfig& cfg) {
  const int m = s.measured_dim();
  Eigen::MatrixXd cov =
      s.covariance.topLeftCorner(m, m) + detail::measurement_noise(s, cfg);
  detail::symmetrize(cov);
  return cov;
}

/// Exponential moving average of box extents and yaw; the center is left
/// untouched (it belongs to the Kalman filter in the kCenter6 variant).
/// Yaw moves by alpha times the flip-aware residual.
inline OrientedBox3D ema_smooth(const OrientedBox3D& track_box,
                                const OrientedBox3D& det_box, double alpha) {
  if (!(alpha > 0.0) || alpha > 1.0) {
    throw std::invalid_argument("ema_smooth: alpha must be in (0, 1]");
  }
  OrientedBox3D out = track_box;
  out.dx = alpha * det_box.dx + (1.0 - alpha) * track_box.dx;
  out.dy = alpha * det_box.dy + (1.0 - alpha) * track_box.dy;
  out.dz = alpha * det_box.dz + (1.0 - alpha) * track_box.dz;
  out.yaw = normalize_yaw(track_box.yaw +
                          alpha * yaw_residual(track_box.yaw, det_box.yaw));
  return out;
}

}  // namespace bevmot
