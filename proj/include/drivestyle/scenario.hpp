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

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "drivestyle/common.hpp"
#include "drivestyle/spline.hpp"

namespace drivestyle
{

using Vec2 = Eigen::Vector2d;

/// One kinematic sample of a trajectory.
struct TrajState
{
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double v = 0.0;
  double a = 0.0;
  double theta = 0.0;

  Vec2 position() const { return {x, y}; }
  bool operator==(const TrajState &) const = default;
};

/// Uniformly sampled state sequence.
struct Trajectory
{
  double dt = 0.1;
  std::vector<TrajState> states;

  std::size_t size() const { return states.size(); }
  double duration() const { return states.empty() ? 0.0 : (states.size() - 1) * dt; }
  bool operator==(const Trajectory &) const = default;

  void validate() const
  {
    if (states.size() < 2) {
      throw InvariantError("trajectory needs at least two states");
    }
    if (!(dt > 0.0)) {
      throw InvariantError("trajectory dt must be positive");
    }
    for (std::size_t i = 0; i < states.size(); ++i) {
      const auto &s = states[i];
      if (!std::isfinite(s.t) || !std::isfinite(s.x) || !std::isfinite(s.y) ||
          !std::isfinite(s.v) || !std::isfinite(s.a) || !std::isfinite(s.theta)) {
        throw InvariantError("trajectory state " + std::to_string(i) + " is not finite");
      }
      if (s.theta <= -kPi || s.theta > kPi) {
        throw InvariantError("trajectory state " + std::to_string(i) + " heading not normalized");
      }
      if (i > 0 && std::abs(s.t - states[i - 1].t - dt) > 1e-9) {
        throw InvariantError("trajectory state " + std::to_string(i) + " breaks uniform dt");
      }
    }
  }
};

/// Pose of the reference curve at an arc-length station.
struct PathPose
{
  Vec2 point = Vec2::Zero();
  double heading = 0.0;
  double kappa = 0.0;
  double dkappa = 0.0;

  Vec2 tangent() const { return {std::cos(heading), std::sin(heading)}; }
  Vec2 normal() const { return {-std::sin(heading), std::cos(heading)}; }
};

struct FrenetPoint
{
  double s = 0.0;
  double d = 0.0;
};

/// Curvilinear state with time derivatives of both coordinates.
struct FrenetState
{
  double s = 0.0;
  double s_dot = 0.0;
  double s_ddot = 0.0;
  double d = 0.0;
  double d_dot = 0.0;
  double d_ddot = 0.0;
};

/// Reference polyline, smoothed by a natural cubic spline and resampled at
/// fixed arc-length spacing. Immutable after construction.
class ReferencePath
{
public:
  static constexpr double kSpacing = 0.5;
  /// Maximum distance from the path at which projection is defined.
  static constexpr double kProjectionRange = 50.0;

  ReferencePath() = default;

  explicit ReferencePath(std::vector<Vec2> raw) : raw_(std::move(raw))
  {
    if (raw_.size() < 2) {
      throw InvariantError("reference path needs at least two points");
    }
    std::vector<double> u(raw_.size(), 0.0), xs(raw_.size()), ys(raw_.size());
    for (std::size_t i = 0; i < raw_.size(); ++i) {
      if (!raw_[i].allFinite()) {
        throw InvariantError("reference point " + std::to_string(i) + " is not finite");
      }
      xs[i] = raw_[i].x();
      ys[i] = raw_[i].y();
      if (i > 0) {
        const double step = (raw_[i] - raw_[i - 1]).norm();
        if (!(step > 1e-9)) {
          throw InvariantError("reference points " + std::to_string(i - 1) + " and " +
                               std::to_string(i) + " coincide");
        }
        u[i] = u[i - 1] + step;
      }
    }
    sx_ = CubicSpline1D(u, xs);
    sy_ = CubicSpline1D(u, ys);

    // Cumulative arc length at every raw knot.
    std::vector<double> knot_s(u.size(), 0.0);
    for (std::size_t i = 1; i < u.size(); ++i) {
      knot_s[i] = knot_s[i - 1] + arc_integral(u[i - 1], u[i]);
    }
    const double total = knot_s.back();

    std::vector<double> stations;
    for (std::size_t k = 0; k * kSpacing < total - 1e-6; ++k) {
      stations.push_back(k * kSpacing);
    }
    stations.push_back(total);

    std::size_t seg = 0;
    for (double s : stations) {
      while (seg + 2 < u.size() && knot_s[seg + 1] < s) {
        ++seg;
      }
      const double param = invert_arc(u[seg], u[seg + 1], s - knot_s[seg]);
      const double dx = sx_.first(param), dy = sy_.first(param);
      const double ddx = sx_.second(param), ddy = sy_.second(param);
      const double speed = std::hypot(dx, dy);
      points_.emplace_back(sx_.value(param), sy_.value(param));
      arclen_.push_back(s);
      heading_.push_back(std::atan2(dy, dx));
      curvature_.push_back((dx * ddy - dy * ddx) / (speed * speed * speed));
    }
  }

  const std::vector<Vec2> &raw_points() const { return raw_; }
  const std::vector<Vec2> &points() const { return points_; }
  const std::vector<double> &arclen() const { return arclen_; }
  const std::vector<double> &curvature() const { return curvature_; }
  const std::vector<double> &headings() const { return heading_; }
  double length() const { return arclen_.empty() ? 0.0 : arclen_.back(); }

  /// Pose at arc length s (clamped into [0, length]). Positions follow a
  /// cubic Hermite curve through the stations; curvature is interpolated
  /// linearly between stations.
  PathPose at(double s) const
  {
    s = std::clamp(s, 0.0, length());
    const std::size_t k = segment_of(s);
    const double h = arclen_[k + 1] - arclen_[k];
    const double tau = (s - arclen_[k]) / h;
    const auto [p, dp] = hermite(k, tau);
    PathPose pose;
    pose.point = p;
    pose.heading = std::atan2(dp.y(), dp.x());
    pose.kappa = curvature_[k] + tau * (curvature_[k + 1] - curvature_[k]);
    pose.dkappa = (curvature_[k + 1] - curvature_[k]) / h;
    return pose;
  }

  /// Closest point on the path. Ties between equidistant segments resolve
  /// to the smaller arc length.
  FrenetPoint project(const Vec2 &point) const
  {
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < points_.size(); ++k) {
      const Vec2 seg = points_[k + 1] - points_[k];
      const double f = std::clamp((point - points_[k]).dot(seg) / seg.squaredNorm(), 0.0, 1.0);
      const double dist = (points_[k] + f * seg - point).squaredNorm();
      if (dist < best_dist) {
        best_dist = dist;
        best = k;
      }
    }
    const double lo = arclen_[best > 0 ? best - 1 : 0];
    const double hi = arclen_[std::min(best + 2, arclen_.size() - 1)];
    double s = minimize_distance(point, lo, hi);

    const Vec2 foot = position_and_tangent(s).first;
    const Vec2 offset = point - foot;
    if (offset.norm() > kProjectionRange) {
      throw DomainError(
        "point (" + fixed(point.x(), 3) + ", " + fixed(point.y(), 3) + ") lies " +
        fixed(offset.norm(), 3) + " m from the reference path, beyond the projection range");
    }
    const Vec2 tangent = position_and_tangent(s).second.normalized();
    return {s, tangent.x() * offset.y() - tangent.y() * offset.x()};
  }

  bool operator==(const ReferencePath &other) const { return raw_ == other.raw_; }

private:
  double arc_integral(double u0, double u1) const
  {
    static constexpr std::array<double, 5> nodes = {
      -0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640};
    static constexpr std::array<double, 5> weights = {
      0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
      0.2369268850561891};
    const int pieces = std::max(1, static_cast<int>(std::ceil((u1 - u0) / 2.0)));
    const double width = (u1 - u0) / pieces;
    double total = 0.0;
    for (int p = 0; p < pieces; ++p) {
      const double a = u0 + p * width;
      const double mid = a + 0.5 * width;
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double x = mid + 0.5 * width * nodes[i];
        total += 0.5 * width * weights[i] * std::hypot(sx_.first(x), sy_.first(x));
      }
    }
    return total;
  }

  /// Parameter u in [u0, u1] whose arc length from u0 equals target.
  double invert_arc(double u0, double u1, double target) const
  {
    double lo = u0, hi = u1;
    double u = u0 + std::clamp(target / std::max(arc_integral(u0, u1), 1e-12), 0.0, 1.0) * (u1 - u0);
    for (int it = 0; it < 50; ++it) {
      const double f = arc_integral(u0, u) - target;
      if (std::abs(f) < 1e-12) {
        break;
      }
      if (f > 0) {
        hi = u;
      } else {
        lo = u;
      }
      double next = u - f / std::hypot(sx_.first(u), sy_.first(u));
      if (!(next > lo && next < hi)) {
        next = 0.5 * (lo + hi);
      }
      u = next;
    }
    return u;
  }

  std::size_t segment_of(double s) const
  {
    auto it = std::upper_bound(arclen_.begin(), arclen_.end(), s);
    std::size_t k = it == arclen_.begin() ? 0 : static_cast<std::size_t>(it - arclen_.begin()) - 1;
    return std::min(k, arclen_.size() - 2);
  }

  /// Hermite position and d/ds derivative on segment k at fraction tau.
  std::pair<Vec2, Vec2> hermite(std::size_t k, double tau) const
  {
    const double h = arclen_[k + 1] - arclen_[k];
    const Vec2 m0 = h * Vec2(std::cos(heading_[k]), std::sin(heading_[k]));
    const Vec2 m1 = h * Vec2(std::cos(heading_[k + 1]), std::sin(heading_[k + 1]));
    const double t2 = tau * tau, t3 = t2 * tau;
    const Vec2 p = (2 * t3 - 3 * t2 + 1) * points_[k] + (t3 - 2 * t2 + tau) * m0 +
                   (-2 * t3 + 3 * t2) * points_[k + 1] + (t3 - t2) * m1;
    const Vec2 dp = ((6 * t2 - 6 * tau) * points_[k] + (3 * t2 - 4 * tau + 1) * m0 +
                     (-6 * t2 + 6 * tau) * points_[k + 1] + (3 * t2 - 2 * tau) * m1) /
                    h;
    return {p, dp};
  }

  std::pair<Vec2, Vec2> position_and_tangent(double s) const
  {
    const std::size_t k = segment_of(s);
    const double h = arclen_[k + 1] - arclen_[k];
    return hermite(k, (s - arclen_[k]) / h);
  }

  double minimize_distance(const Vec2 &point, double lo, double hi) const
  {
    // Golden-section bracket search followed by Newton polishing on
    // g(s) = (C(s) - P) . C'(s).
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    auto cost = [&](double s) { return (position_and_tangent(s).first - point).squaredNorm(); };
    double a = lo, b = hi;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = cost(c), fd = cost(d);
    for (int it = 0; it < 60 && (b - a) > 1e-7; ++it) {
      if (fc <= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - phi * (b - a);
        fc = cost(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + phi * (b - a);
        fd = cost(d);
      }
    }
    double s = 0.5 * (a + b);
    if (cost(lo) < cost(s)) {
      s = lo;
    }
    if (cost(hi) < cost(s)) {
      s = hi;
    }
    for (int it = 0; it < 8; ++it) {
      const double eps = 1e-6;
      const auto [p, dp] = position_and_tangent(s);
      const double g = (p - point).dot(dp);
      const auto [pe, dpe] = position_and_tangent(std::min(s + eps, hi));
      const auto [pm, dpm] = position_and_tangent(std::max(s - eps, lo));
      const double gp = ((pe - point).dot(dpe) - (pm - point).dot(dpm)) /
                        (std::min(s + eps, hi) - std::max(s - eps, lo));
      if (!(gp > 0.0)) {
        break;
      }
      const double next = std::clamp(s - g / gp, lo, hi);
      if (std::abs(next - s) < 1e-13) {
        s = next;
        break;
      }
      s = next;
    }
    return s;
  }

  std::vector<Vec2> raw_;
  CubicSpline1D sx_, sy_;
  std::vector<Vec2> points_;
  std::vector<double> arclen_;
  std::vector<double> heading_;
  std::vector<double> curvature_;
};

struct ObstacleState
{
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double v = 0.0;
  bool operator==(const ObstacleState &) const = default;
};

/// Rectangular-footprint agent with a timestamped state track.
struct Obstacle
{
  std::string id;
  double length = 4.5;
  double width = 1.8;
  std::vector<ObstacleState> states;

  bool operator==(const Obstacle &) const = default;

  void validate(const std::string &path) const
  {
    if (!(length > 0.0) || !(width > 0.0)) {
      throw InvariantError(path + ": zero-size obstacle footprint");
    }
    if (states.empty()) {
      throw InvariantError(path + ".states: obstacle has no states");
    }
    for (std::size_t i = 1; i < states.size(); ++i) {
      if (!(states[i].t > states[i - 1].t)) {
        throw InvariantError(path + ".states[" + std::to_string(i) + "]: non-increasing timestamps");
      }
    }
  }

  /// State at time t, interpolated linearly and held outside the track.
  ObstacleState state_at(double t) const
  {
    if (t <= states.front().t) {
      return states.front();
    }
    if (t >= states.back().t) {
      return states.back();
    }
    auto it = std::upper_bound(states.begin(), states.end(), t,
                               [](double value, const ObstacleState &s) { return value < s.t; });
    const ObstacleState &b = *it;
    const ObstacleState &a = *(it - 1);
    const double f = (t - a.t) / (b.t - a.t);
    ObstacleState out;
    out.t = t;
    out.x = a.x + f * (b.x - a.x);
    out.y = a.y + f * (b.y - a.y);
    out.v = a.v + f * (b.v - a.v);
    out.theta = normalize_angle(a.theta + f * normalize_angle(b.theta - a.theta));
    return out;
  }
};

struct GoalRegion
{
  double x = 0.0;
  double y = 0.0;
  double radius = 1.0;

  bool contains(double px, double py) const { return std::hypot(px - x, py - y) <= radius; }
  bool operator==(const GoalRegion &) const = default;
};

struct Scenario
{
  std::string id;
  ReferencePath reference;
  std::vector<Obstacle> obstacles;
  TrajState ego_init;
  GoalRegion goal;
  double duration = 10.0;
  double dt_sim = 0.1;
  /// Speed the velocity-offset cost tracks; falls back to the initial speed.
  std::optional<double> v_desired;

  double desired_speed() const { return v_desired.value_or(ego_init.v); }
  bool operator==(const Scenario &) const = default;

  /// Maximum lateral offset of ego_init from the reference path.
  static constexpr double kEgoLateralBound = 5.0;

  void validate() const
  {
    if (!(duration > 0.0)) {
      throw InvariantError("duration: must be positive");
    }
    if (!(dt_sim > 0.0)) {
      throw InvariantError("dt_sim: must be positive");
    }
    if (!(goal.radius > 0.0)) {
      throw InvariantError("goal.radius: must be positive");
    }
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
      obstacles[i].validate("obstacles[" + std::to_string(i) + "]");
    }
    FrenetPoint fp;
    try {
      fp = reference.project(ego_init.position());
    } catch (const DomainError &) {
      throw InvariantError("ego_init: not projectable onto the reference path");
    }
    if (std::abs(fp.d) > kEgoLateralBound) {
      throw InvariantError("ego_init: lateral offset " + fixed(fp.d, 3) +
                           " m exceeds the 5 m bound");
    }
  }
};

inline FrenetPoint project_to_frenet(const ReferencePath &reference, const Vec2 &point)
{
  return reference.project(point);
}

/// Converts curvilinear states sampled every dt (starting at t0) into a
/// Cartesian trajectory. Speed is signed: motion against the path direction
/// yields negative v with the heading kept along the vehicle's nose.
inline Trajectory frenet_to_cartesian(const ReferencePath &reference,
                                      std::span<const FrenetState> frenet, double dt,
                                      double t0 = 0.0)
{
  Trajectory traj;
  traj.dt = dt;
  traj.states.reserve(frenet.size());
  const double length = reference.length();
  std::optional<double> last_heading;
  for (std::size_t i = 0; i < frenet.size(); ++i) {
    const FrenetState &f = frenet[i];
    if (f.s < -1e-6 || f.s > length + 1e-6) {
      throw DomainError("frenet state " + std::to_string(i) + ": s = " + fixed(f.s, 3) +
                        " outside the reference path extent");
    }
    const PathPose pose = reference.at(f.s);
    const double one_minus = 1.0 - pose.kappa * f.d;
    if (!(one_minus > 0.0)) {
      throw DomainError("frenet state " + std::to_string(i) +
                        ": singular conversion, |d * kappa| >= 1");
    }
    const Vec2 tan = pose.tangent();
    const Vec2 nor = pose.normal();
    const double along = f.s_dot * one_minus;
    const double across = f.d_dot;
    const double along_dot =
      f.s_ddot * one_minus - f.s_dot * (pose.dkappa * f.s_dot * f.d + pose.kappa * f.d_dot);
    const Vec2 vel = along * tan + across * nor;
    const Vec2 acc = (along_dot - across * pose.kappa * f.s_dot) * tan +
                     (along * pose.kappa * f.s_dot + f.d_ddot) * nor;

    const double speed = vel.norm();
    const bool reverse = along < 0.0;
    double heading;
    if (speed > 1e-3) {
      heading = reverse ? std::atan2(-vel.y(), -vel.x()) : std::atan2(vel.y(), vel.x());
    } else {
      heading = last_heading.value_or(pose.heading);
    }
    heading = normalize_angle(heading);
    last_heading = heading;

    TrajState st;
    st.t = t0 + static_cast<double>(i) * dt;
    const Vec2 p = pose.point + f.d * nor;
    st.x = p.x();
    st.y = p.y();
    st.v = reverse ? -speed : speed;
    st.a = acc.dot(Vec2(std::cos(heading), std::sin(heading)));
    st.theta = heading;
    traj.states.push_back(st);
  }
  return traj;
}

/// Frenet state of a Cartesian kinematic state (acceleration treated as
/// purely longitudinal).
inline FrenetState cartesian_to_frenet(const ReferencePath &reference, const TrajState &state)
{
  const FrenetPoint fp = reference.project(state.position());
  const PathPose pose = reference.at(fp.s);
  const double dtheta = normalize_angle(state.theta - pose.heading);
  const double one_minus = 1.0 - pose.kappa * fp.d;
  if (!(one_minus > 0.0)) {
    throw DomainError("singular Frenet conversion of Cartesian state");
  }
  FrenetState f;
  f.s = fp.s;
  f.d = fp.d;
  f.s_dot = state.v * std::cos(dtheta) / one_minus;
  f.d_dot = state.v * std::sin(dtheta);
  f.s_ddot = state.a * std::cos(dtheta) / one_minus;
  f.d_ddot = state.a * std::sin(dtheta);
  return f;
}

}  // namespace drivestyle
