// Copyright 2026 The drivestyle Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "drivestyle/common.hpp"
#include "drivestyle/scenario.hpp"

namespace drivestyle
{

/// Oriented rectangle given by center, heading and full extents.
struct OrientedBox
{
  Vec2 center = Vec2::Zero();
  double heading = 0.0;
  double length = 0.0;
  double width = 0.0;

  std::array<Vec2, 4> corners() const
  {
    const Vec2 ax(std::cos(heading), std::sin(heading));
    const Vec2 ay(-ax.y(), ax.x());
    const Vec2 hl = 0.5 * length * ax;
    const Vec2 hw = 0.5 * width * ay;
    return {center + hl + hw, center - hl + hw, center - hl - hw, center + hl - hw};
  }

  double circumradius() const { return 0.5 * std::hypot(length, width); }

  bool contains(const Vec2 &p) const
  {
    const Vec2 d = p - center;
    const double c = std::cos(heading), s = std::sin(heading);
    return std::abs(c * d.x() + s * d.y()) <= 0.5 * length &&
           std::abs(-s * d.x() + c * d.y()) <= 0.5 * width;
  }
};

inline double point_segment_distance(const Vec2 &p, const Vec2 &a, const Vec2 &b)
{
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double f = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + f * ab - p).norm();
}

namespace detail
{

inline bool corners_overlap(const std::array<Vec2, 4> &ca, double heading_a,
                            const std::array<Vec2, 4> &cb, double heading_b)
{
  const std::array<Vec2, 4> axes = {Vec2(std::cos(heading_a), std::sin(heading_a)),
                                    Vec2(-std::sin(heading_a), std::cos(heading_a)),
                                    Vec2(std::cos(heading_b), std::sin(heading_b)),
                                    Vec2(-std::sin(heading_b), std::cos(heading_b))};
  for (const Vec2 &axis : axes) {
    double amin = 1e300, amax = -1e300, bmin = 1e300, bmax = -1e300;
    for (const Vec2 &p : ca) {
      amin = std::min(amin, p.dot(axis));
      amax = std::max(amax, p.dot(axis));
    }
    for (const Vec2 &p : cb) {
      bmin = std::min(bmin, p.dot(axis));
      bmax = std::max(bmax, p.dot(axis));
    }
    if (amax < bmin || bmax < amin) {
      return false;
    }
  }
  return true;
}

}  // namespace detail

/// Separating-axis test on two footprints (touching counts as overlap).
inline bool boxes_overlap(const OrientedBox &a, const OrientedBox &b)
{
  return detail::corners_overlap(a.corners(), a.heading, b.corners(), b.heading);
}

/// Minimum distance between two footprints, zero when they overlap.
inline double box_distance(const OrientedBox &a, const OrientedBox &b)
{
  const auto ca = a.corners();
  const auto cb = b.corners();
  if (detail::corners_overlap(ca, a.heading, cb, b.heading)) {
    return 0.0;
  }
  double best = 1e300;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      best = std::min(best, point_segment_distance(ca[i], cb[j], cb[(j + 1) % 4]));
      best = std::min(best, point_segment_distance(cb[i], ca[j], ca[(j + 1) % 4]));
    }
  }
  return best;
}

inline double point_box_distance(const Vec2 &p, const OrientedBox &box)
{
  if (box.contains(p)) {
    return 0.0;
  }
  const auto c = box.corners();
  double best = 1e300;
  for (int j = 0; j < 4; ++j) {
    best = std::min(best, point_segment_distance(p, c[j], c[(j + 1) % 4]));
  }
  return best;
}

/// Angular interval [lo, hi] (radians, hi - lo < 2 pi) that a box subtends
/// as seen from `eye`. Returns false when the eye lies inside the box.
inline bool angular_extent(const Vec2 &eye, const OrientedBox &box, double &lo, double &hi)
{
  if (box.contains(eye)) {
    return false;
  }
  const Vec2 to_center = box.center - eye;
  const double ref = std::atan2(to_center.y(), to_center.x());
  double mn = 1e300, mx = -1e300;
  for (const Vec2 &c : box.corners()) {
    const Vec2 d = c - eye;
    const double ang = normalize_angle(std::atan2(d.y(), d.x()) - ref);
    mn = std::min(mn, ang);
    mx = std::max(mx, ang);
  }
  lo = ref + mn;
  hi = ref + mx;
  return true;
}

/// Total length of the union of circular intervals, each given as [lo, hi]
/// with hi >= lo.
inline double circular_union_length(const std::vector<std::pair<double, double>> &intervals)
{
  const double two_pi = 2.0 * kPi;
  std::vector<std::pair<double, double>> flat;
  for (auto [lo, hi] : intervals) {
    const double width = hi - lo;
    if (width >= two_pi) {
      return two_pi;
    }
    lo = std::fmod(lo, two_pi);
    if (lo < 0.0) {
      lo += two_pi;
    }
    if (lo + width > two_pi) {
      flat.emplace_back(lo, two_pi);
      flat.emplace_back(0.0, lo + width - two_pi);
    } else {
      flat.emplace_back(lo, lo + width);
    }
  }
  std::sort(flat.begin(), flat.end());
  double total = 0.0;
  double cur_lo = 0.0, cur_hi = -1.0;
  for (const auto &[lo, hi] : flat) {
    if (lo > cur_hi) {
      if (cur_hi > cur_lo) {
        total += cur_hi - cur_lo;
      }
      cur_lo = lo;
      cur_hi = hi;
    } else {
      cur_hi = std::max(cur_hi, hi);
    }
  }
  if (cur_hi > cur_lo) {
    total += cur_hi - cur_lo;
  }
  return std::min(total, two_pi);
}

}  // namespace drivestyle
