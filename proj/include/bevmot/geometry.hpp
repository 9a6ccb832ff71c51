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
#include <numeric>
#include <vector>

#include "bevmot/core.hpp"

namespace bevmot {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double cross(const Vec2& a, const Vec2& b) {
  return a.x * b.y - a.y * b.x;
}

/// Convex polygon with counter-clockwise vertices. Fewer than three
/// vertices means a degenerate, area-zero region.
struct ConvexPolygon2D {
  std::vector<Vec2> vertices;

  double signed_area() const {
    const std::size_t n = vertices.size();
    if (n < 3) return 0.0;
    double twice = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2& a = vertices[i];
      const Vec2& b = vertices[(i + 1) % n];
      twice += a.x * b.y - a.y * b.x;
    }
    return 0.5 * twice;
  }
};

/// The box footprint in the BEV plane: a CCW rectangle centered at
/// (cx, cy) with half-extents (dx/2, dy/2) rotated by yaw.
inline ConvexPolygon2D bev_polygon(const OrientedBox3D& box) {
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  const double hx = 0.5 * box.dx;
  const double hy = 0.5 * box.dy;
  // Local corners in CCW order.
  const double lx[4] = {hx, -hx, -hx, hx};
  const double ly[4] = {hy, hy, -hy, -hy};
  ConvexPolygon2D poly;
  poly.vertices.reserve(4);
  for (int i = 0; i < 4; ++i) {
    poly.vertices.push_back(
        {box.cx + c * lx[i] - s * ly[i], box.cy + s * lx[i] + c * ly[i]});
  }
  return poly;
}

/// Area of the intersection of two convex polygons via Sutherland-Hodgman
/// clipping followed by the shoelace formula. Symmetric; degenerate
/// (edge or point) contact counts as zero.
inline double convex_intersection_area(const ConvexPolygon2D& a,
                                       const ConvexPolygon2D& b) {
  if (a.vertices.size() < 3 || b.vertices.size() < 3) return 0.0;
  std::vector<Vec2> poly = a.vertices;
  std::vector<Vec2> clipped;
  const std::size_t nb = b.vertices.size();
  for (std::size_t i = 0; i < nb && poly.size() >= 2; ++i) {
    const Vec2& e0 = b.vertices[i];
    const Vec2& e1 = b.vertices[(i + 1) % nb];
    const Vec2 edge{e1.x - e0.x, e1.y - e0.y};
    clipped.clear();
    const std::size_t np = poly.size();
    for (std::size_t j = 0; j < np; ++j) {
      const Vec2& cur = poly[j];
      const Vec2& nxt = poly[(j + 1) % np];
      const double side_cur = cross(edge, {cur.x - e0.x, cur.y - e0.y});
      const double side_nxt = cross(edge, {nxt.x - e0.x, nxt.y - e0.y});
      if (side_cur >= 0.0) clipped.push_back(cur);
      if ((side_cur > 0.0 && side_nxt < 0.0) ||
          (side_cur < 0.0 && side_nxt > 0.0)) {
        const double t = side_cur / (side_cur - side_nxt);
        clipped.push_back(
            {cur.x + t * (nxt.x - cur.x), cur.y + t * (nxt.y - cur.y)});
      }
    }
    poly.swap(clipped);
  }
  if (poly.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    twice += p.x * q.y - p.y * q.x;
  }
  return std::max(0.0, 0.5 * twice);
}

/// Intersection-over-union of two yaw-rotated rectangles in the BEV plane.
/// z and dz are ignored.
inline double rotated_bev_iou(const OrientedBox3D& a, const OrientedBox3D& b) {
  const double area_a = a.dx * a.dy;
  const double area_b = b.dx * b.dy;
  // Identical footprints overlap fully; skipping the clipper keeps the
  // result exactly 1 for them.
  if (a.cx == b.cx && a.cy == b.cy && a.dx == b.dx && a.dy == b.dy &&
      a.yaw == b.yaw) {
    return 1.0;
  }
  // Quick reject: centers farther apart than the circumradius sum.
  const double dist = std::hypot(a.cx - b.cx, a.cy - b.cy);
  const double reach = 0.5 * (std::hypot(a.dx, a.dy) + std::hypot(b.dx, b.dy));
  if (dist > reach) return 0.0;
  // Shift both footprints toward the origin for better conditioning far
  // from the sensor.
  const double mx = 0.5 * (a.cx + b.cx);
  const double my = 0.5 * (a.cy + b.cy);
  OrientedBox3D sa = a;
  OrientedBox3D sb = b;
  sa.cx -= mx;
  sa.cy -= my;
  sb.cx -= mx;
  sb.cy -= my;
  const double inter =
      convex_intersection_area(bev_polygon(sa), bev_polygon(sb));
  const double uni = area_a + area_b - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

/// Horizontal radial distance of the box center from the sensor axis.
inline double horizontal_radius(const OrientedBox3D& box) {
  return std::hypot(box.cx, box.cy);
}

/// Greedy non-maximum suppression on rotated BEV footprints. Detections
/// are visited in descending score (ties by input order); one is kept iff
/// its IoU with every already-kept detection stays below the threshold.
/// Output preserves the score-descending visit order.
inline std::vector<Detection> nms_rotated(const std::vector<Detection>& dets,
                                          double iou_threshold) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    return dets[l].score > dets[r].score;
  });
  std::vector<Detection> kept;
  for (std::size_t idx : order) {
    bool keep = true;
    for (const Detection& k : kept) {
      if (rotated_bev_iou(dets[idx].box, k.box) >= iou_threshold) {
        keep = false;
        break;
      }
    }
    if (keep) kept.push_back(dets[idx]);
  }
  return kept;
}

}  // namespace bevmot
