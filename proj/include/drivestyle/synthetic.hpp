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
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "drivestyle/common.hpp"
#include "drivestyle/random.hpp"
#include "drivestyle/scenario.hpp"

namespace drivestyle
{

enum class ScenarioKind { straight, curve, lane_obstacle, crossing };

inline std::string_view to_string(ScenarioKind kind)
{
  switch (kind) {
    case ScenarioKind::straight:
      return "straight";
    case ScenarioKind::curve:
      return "curve";
    case ScenarioKind::lane_obstacle:
      return "lane-obstacle";
    case ScenarioKind::crossing:
      return "crossing";
  }
  return "straight";
}

inline ScenarioKind scenario_kind_from_string(std::string_view name)
{
  for (auto kind : {ScenarioKind::straight, ScenarioKind::curve, ScenarioKind::lane_obstacle,
                    ScenarioKind::crossing}) {
    if (to_string(kind) == name) {
      return kind;
    }
  }
  throw ConfigError("unknown scenario kind '" + std::string(name) + "'");
}

namespace synthetic
{

inline constexpr double kLaneWidth = 3.5;
inline constexpr double kCarLength = 4.5;
inline constexpr double kCarWidth = 1.8;
inline constexpr double kBikeLength = 1.8;
inline constexpr double kBikeWidth = 0.7;
/// Lateral offset of cars parked along the right road edge.
inline constexpr double kParkedOffset = -(0.5 * kLaneWidth + 0.3 + 0.5 * kCarWidth);
inline constexpr double kTrackStep = 0.5;
/// Desired speed shared by every synthetic scenario (urban limit).
inline constexpr double kUrbanSpeed = 10.0;

/// Heading and curvature profile of a road built from straights and arcs.
struct RoadPiece
{
  double length = 0.0;
  double curvature = 0.0;
};

inline std::vector<Vec2> trace_road(const std::vector<RoadPiece> &pieces, double step = 2.0)
{
  std::vector<Vec2> pts{Vec2(0.0, 0.0)};
  double heading = 0.0;
  Vec2 p(0.0, 0.0);
  for (const auto &piece : pieces) {
    const int n = std::max(1, static_cast<int>(std::ceil(piece.length / step)));
    const double ds = piece.length / n;
    for (int i = 0; i < n; ++i) {
      if (piece.curvature == 0.0) {
        p += ds * Vec2(std::cos(heading), std::sin(heading));
      } else {
        const double next = heading + piece.curvature * ds;
        p += Vec2(std::sin(next) - std::sin(heading), std::cos(heading) - std::cos(next)) /
             piece.curvature;
        heading = next;
      }
      pts.push_back(p);
    }
  }
  return pts;
}

inline Vec2 frenet_point(const ReferencePath &ref, double s, double d)
{
  const PathPose pose = ref.at(std::clamp(s, 0.0, ref.length()));
  return pose.point + d * pose.normal();
}

inline Obstacle parked_car(const ReferencePath &ref, const std::string &id, double s, double d)
{
  const PathPose pose = ref.at(std::clamp(s, 0.0, ref.length()));
  const Vec2 c = pose.point + d * pose.normal();
  Obstacle ob;
  ob.id = id;
  ob.length = kCarLength;
  ob.width = kCarWidth;
  ob.states.push_back({0.0, c.x(), c.y(), pose.heading, 0.0});
  return ob;
}

/// Agent driving along the reference at a fixed lateral offset; negative
/// speed drives against the path direction.
inline Obstacle path_follower(const ReferencePath &ref, const std::string &id, double s0, double d,
                              double speed, double t_end)
{
  Obstacle ob;
  ob.id = id;
  ob.length = kCarLength;
  ob.width = kCarWidth;
  for (double t = 0.0; t <= t_end + 1e-9; t += kTrackStep) {
    const double s = s0 + speed * t;
    if (s < 0.0 || s > ref.length()) {
      break;
    }
    const PathPose pose = ref.at(s);
    const Vec2 c = pose.point + d * pose.normal();
    const double heading = speed >= 0.0 ? pose.heading : normalize_angle(pose.heading + kPi);
    ob.states.push_back({t, c.x(), c.y(), heading, std::abs(speed)});
  }
  if (ob.states.size() < 2) {
    const PathPose pose = ref.at(std::clamp(s0, 0.0, ref.length()));
    const Vec2 c = pose.point + d * pose.normal();
    ob.states = {{0.0, c.x(), c.y(), pose.heading, 0.0},
                 {kTrackStep, c.x(), c.y(), pose.heading, 0.0}};
  }
  return ob;
}

/// Agent crossing the reference perpendicularly at arc length s_cross,
/// passing the centerline at t_cross.
inline Obstacle crossing_agent(const ReferencePath &ref, const std::string &id, double s_cross,
                               double speed, double t_cross, bool from_right, double t_end)
{
  const PathPose pose = ref.at(s_cross);
  const Vec2 dir = from_right ? pose.normal() : Vec2(-pose.normal());
  const double heading = std::atan2(dir.y(), dir.x());
  Obstacle ob;
  ob.id = id;
  ob.length = kCarLength;
  ob.width = kCarWidth;
  for (double t = 0.0; t <= t_end + 1e-9; t += kTrackStep) {
    const Vec2 c = pose.point + (speed * (t - t_cross)) * dir;
    ob.states.push_back({t, c.x(), c.y(), heading, speed});
  }
  return ob;
}

/// Rounds to a multiple of `q` so generated numbers serialize compactly.
inline double quantize(double value, double q) { return std::round(value / q) * q; }

}  // namespace synthetic

/// Deterministic synthetic scenario of the given kind.
///
/// Every kind starts the ego on the centerline near the path start at the
/// desired speed. Kinds other than `straight` carry parked cars along the
/// right edge (occluders) and at least one moving agent.
inline Scenario generate_synthetic_scenario(ScenarioKind kind, std::uint64_t seed)
{
  using namespace synthetic;
  Rng rng(seed ^ (0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(kind) + 1)));

  Scenario sc;
  sc.dt_sim = 0.1;
  sc.duration = quantize(rng.uniform(10.0, 30.0), 0.5);
  const double v_des = kUrbanSpeed;
  sc.v_desired = v_des;
  const double ego_s = 5.0;
  const double travel = 1.2 * v_des * (sc.duration + 6.0) + 40.0;

  std::vector<RoadPiece> pieces;
  std::string id = "synthetic-" + std::string(to_string(kind));
  switch (kind) {
    case ScenarioKind::straight:
    case ScenarioKind::lane_obstacle:
    case ScenarioKind::crossing:
      pieces.push_back({ego_s + travel, 0.0});
      break;
    case ScenarioKind::curve: {
      const double radius = quantize(rng.uniform(40.0, 120.0), 5.0);
      const double turn = rng.uniform(kPi / 3.0, 2.0 * kPi / 3.0);
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      const double lead = quantize(rng.uniform(20.0, 60.0), 1.0);
      const double arc = radius * turn;
      pieces.push_back({lead, 0.0});
      pieces.push_back({arc, sign / radius});
      pieces.push_back({std::max(20.0, ego_s + travel - lead - arc), 0.0});
      id += "-r" + std::to_string(static_cast<int>(radius));
      break;
    }
  }
  id += "-" + std::to_string(seed);
  sc.id = id;
  sc.reference = ReferencePath(trace_road(pieces));
  const ReferencePath &ref = sc.reference;
  const double t_end = sc.duration + 8.0;

  const PathPose start = ref.at(ego_s);
  sc.ego_init.t = 0.0;
  sc.ego_init.x = start.point.x();
  sc.ego_init.y = start.point.y();
  sc.ego_init.theta = start.heading;
  sc.ego_init.a = 0.0;
  sc.ego_init.v = v_des;

  const Vec2 goal = frenet_point(ref, ref.length() - 10.0, 0.0);
  sc.goal = {goal.x(), goal.y(), 5.0};

  if (kind == ScenarioKind::straight) {
    return sc;
  }

  int next_id = 1;
  auto new_id = [&]() { return std::to_string(next_id++); };

  // Parked cars in clusters along the right edge.
  double s = ego_s + rng.uniform(15.0, 35.0);
  const double parked_end = std::min(ref.length() - 20.0, ego_s + v_des * (sc.duration + 6.0));
  while (s < parked_end) {
    const int cluster = 1 + static_cast<int>(rng.below(3));
    for (int i = 0; i < cluster && s < parked_end; ++i) {
      const double d = kParkedOffset + rng.uniform(-0.2, 0.2);
      sc.obstacles.push_back(parked_car(ref, new_id(), quantize(s, 0.1), quantize(d, 0.05)));
      s += kCarLength + rng.uniform(1.0, 2.5);
    }
    s += rng.uniform(20.0, 60.0);
  }

  // Oncoming traffic in the adjacent lane.
  const int oncoming = 1 + static_cast<int>(rng.below(2));
  for (int i = 0; i < oncoming; ++i) {
    const double s0 = quantize(rng.uniform(80.0, std::max(100.0, ref.length() - 10.0)), 0.5);
    const double v = quantize(rng.uniform(6.0, 12.0), 0.5);
    sc.obstacles.push_back(path_follower(ref, new_id(), s0, kLaneWidth, -v, t_end));
  }

  if (kind == ScenarioKind::lane_obstacle) {
    // A cyclist riding along the right half of the ego lane.
    const double s0 = quantize(ego_s + rng.uniform(30.0, 60.0), 0.5);
    const double d = quantize(-rng.uniform(0.8, 1.2), 0.05);
    const double v = quantize(rng.uniform(3.0, 5.0), 0.5);
    Obstacle bike = path_follower(ref, new_id(), s0, d, v, t_end);
    bike.length = kBikeLength;
    bike.width = kBikeWidth;
    sc.obstacles.push_back(std::move(bike));
  } else if (kind == ScenarioKind::crossing) {
    const double s_cross = quantize(ego_s + rng.uniform(50.0, 100.0), 0.5);
    const double v = quantize(rng.uniform(5.0, 9.0), 0.5);
    const double arrival = (s_cross - ego_s) / v_des;
    const double t_cross = quantize(std::max(1.0, arrival - rng.uniform(2.0, 4.0)), 0.1);
    sc.obstacles.push_back(
      crossing_agent(ref, new_id(), s_cross, v, t_cross, rng.uniform() < 0.5, t_end));
  }
  sc.validate();
  return sc;
}

/// One entry of a synthetic corpus specification.
struct ScenarioSpec
{
  ScenarioKind kind = ScenarioKind::straight;
  std::uint64_t seed = 0;
  bool operator==(const ScenarioSpec &) const = default;
};

/// The default 20-scenario corpus, derived from a master seed.
inline std::vector<ScenarioSpec> default_corpus_specs(std::uint64_t seed)
{
  static constexpr std::array<ScenarioKind, 20> kinds = {
    ScenarioKind::straight,      ScenarioKind::curve,         ScenarioKind::lane_obstacle,
    ScenarioKind::crossing,      ScenarioKind::curve,         ScenarioKind::lane_obstacle,
    ScenarioKind::crossing,      ScenarioKind::curve,         ScenarioKind::lane_obstacle,
    ScenarioKind::crossing,      ScenarioKind::straight,      ScenarioKind::curve,
    ScenarioKind::lane_obstacle, ScenarioKind::crossing,      ScenarioKind::curve,
    ScenarioKind::lane_obstacle, ScenarioKind::crossing,      ScenarioKind::curve,
    ScenarioKind::lane_obstacle, ScenarioKind::crossing,
  };
  Rng rng(seed);
  std::vector<ScenarioSpec> specs;
  for (ScenarioKind kind : kinds) {
    specs.push_back({kind, rng.bits() % 100000});
  }
  return specs;
}

}  // namespace drivestyle
