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
#include <cctype>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drivestyle/common.hpp"
#include "drivestyle/geometry.hpp"
#include "drivestyle/json_util.hpp"
#include "drivestyle/sampler.hpp"
#include "drivestyle/scenario.hpp"

namespace drivestyle
{

enum class Style { Comfort = 0, Balanced = 1, Sporty = 2, Safety = 3, Default = 4 };

inline constexpr std::array<Style, 5> kAllStyles = {Style::Comfort, Style::Balanced, Style::Sporty,
                                                    Style::Safety, Style::Default};

inline std::string_view to_string(Style s)
{
  static constexpr std::array<std::string_view, 5> names = {"Comfort", "Balanced", "Sporty",
                                                            "Safety", "Default"};
  return names[static_cast<std::size_t>(s)];
}

inline Style style_from_string(std::string_view name)
{
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (Style s : kAllStyles) {
    std::string candidate(to_string(s));
    std::transform(candidate.begin(), candidate.end(), candidate.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (candidate == lower) {
      return s;
    }
  }
  if (lower == "safe") {
    return Style::Safety;
  }
  throw ConfigError("unknown driving style '" + std::string(name) + "'");
}

/// Weights of the style cost J = w_kin . c_kin + w_ext . c_ext.
/// w_kin = (jerk_lon, jerk_lat, velocity offset, obstacle distance),
/// w_ext = (phantom risk, visibility seeking).
struct StyleProfile
{
  Style style = Style::Default;
  std::array<double, 4> w_kin{};
  std::array<double, 2> w_ext{};

  std::string name() const { return std::string(to_string(style)); }
  bool operator==(const StyleProfile &) const = default;

  void validate() const
  {
    for (double w : w_kin) {
      if (!(w >= 0.0)) {
        throw ConfigError("style weights must be non-negative");
      }
    }
    for (double w : w_ext) {
      if (!(w >= 0.0)) {
        throw ConfigError("style weights must be non-negative");
      }
    }
  }
};

/// The five built-in profiles in column order Comfort, Balanced, Sporty,
/// Safety, Default.
inline const std::array<StyleProfile, 5> &builtin_profiles()
{
  static const std::array<StyleProfile, 5> profiles = {{
    {Style::Comfort, {0.80, 0.80, 0.30, 0.30}, {3.0, 0.0}},
    {Style::Balanced, {0.50, 0.50, 0.60, 0.80}, {5.0, 0.5}},
    {Style::Sporty, {0.25, 0.25, 1.00, 0.60}, {4.0, 0.8}},
    {Style::Safety, {0.40, 0.40, 0.30, 2.00}, {8.0, 1.5}},
    {Style::Default, {0.20, 0.20, 1.00, 0.00}, {5.0, 0.0}},
  }};
  return profiles;
}

inline const StyleProfile &builtin_profile(Style s)
{
  return builtin_profiles()[static_cast<std::size_t>(s)];
}

inline constexpr std::array<std::string_view, 6> kWeightKeys = {"w_j_lon", "w_j_lat", "w_v",
                                                                "w_obs",   "w_pm",    "w_ve"};

inline Json profile_to_json(const StyleProfile &p)
{
  Json j = Json::object();
  for (std::size_t i = 0; i < 4; ++i) {
    j[std::string(kWeightKeys[i])] = p.w_kin[i];
  }
  for (std::size_t i = 0; i < 2; ++i) {
    j[std::string(kWeightKeys[4 + i])] = p.w_ext[i];
  }
  return j;
}

/// Reads a weight table keyed by style name. Missing weights keep the
/// built-in value for that style.
inline std::vector<StyleProfile> profiles_from_json(const Json &table)
{
  if (!table.is_object()) {
    throw ConfigError("style table must be an object keyed by style name");
  }
  std::vector<StyleProfile> out;
  for (const auto &[name, weights] : table.items()) {
    StyleProfile p = builtin_profile(style_from_string(name));
    if (!weights.is_object()) {
      throw ConfigError("styles." + name + ": expected an object of weights");
    }
    for (const auto &[key, value] : weights.items()) {
      auto it = std::find(kWeightKeys.begin(), kWeightKeys.end(), key);
      if (it == kWeightKeys.end() || !value.is_number()) {
        throw ConfigError("styles." + name + "." + key + ": unknown weight or not a number");
      }
      const auto idx = static_cast<std::size_t>(it - kWeightKeys.begin());
      (idx < 4 ? p.w_kin[idx] : p.w_ext[idx - 4]) = value.get<double>();
    }
    p.validate();
    out.push_back(p);
  }
  return out;
}

struct CostVector
{
  /// (jerk_lon, jerk_lat, vel_offset, obstacle)
  std::array<double, 4> kin{};
  /// (phantom, visibility)
  std::array<double, 2> ext{};
};

inline double total_cost(const StyleProfile &profile, const CostVector &costs)
{
  double j = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    j += profile.w_kin[i] * costs.kin[i];
  }
  for (std::size_t i = 0; i < 2; ++i) {
    j += profile.w_ext[i] * costs.ext[i];
  }
  return j;
}

inline constexpr double kEgoLength = 4.5;
inline constexpr double kEgoWidth = 1.8;
inline constexpr double kSafetyDistance = 3.0;
inline constexpr double kSensorRange = 30.0;
/// Deceleration assumed when judging whether the ego could stop short of an
/// occluded corridor entry.
inline constexpr double kPhantomBraking = 4.0;

inline OrientedBox ego_footprint(const TrajState &s)
{
  return {s.position(), s.theta, kEgoLength, kEgoWidth};
}

/// Obstacle footprints at one instant, plus the point on each footprint
/// where occluded space opens onto the ego corridor.
struct ObstacleSnapshot
{
  OrientedBox box;
  bool has_entry = false;
  Vec2 entry = Vec2::Zero();
};

/// Precomputed obstacle geometry on a uniform time grid. Immutable after
/// construction; times off the grid are computed on demand.
class SceneCache
{
public:
  SceneCache(const Scenario &scenario, double dt, double extra_time = 6.0)
  : scenario_(&scenario), dt_(dt)
  {
    const auto n = static_cast<std::size_t>(std::ceil((scenario.duration + extra_time) / dt)) + 1;
    if (!scenario.obstacles.empty()) {
      frames_.reserve(n);
      for (std::size_t k = 0; k < n; ++k) {
        frames_.push_back(compute(static_cast<double>(k) * dt));
      }
    }
  }

  const Scenario &scenario() const { return *scenario_; }

  std::vector<ObstacleSnapshot> at(double t) const
  {
    if (scenario_->obstacles.empty()) {
      return {};
    }
    const double k = t / dt_;
    const double r = std::round(k);
    if (std::abs(k - r) < 1e-6 && r >= 0.0 && r < static_cast<double>(frames_.size())) {
      return frames_[static_cast<std::size_t>(r)];
    }
    return compute(t);
  }

  const std::vector<ObstacleSnapshot> *frame(double t) const
  {
    const double k = t / dt_;
    const double r = std::round(k);
    if (std::abs(k - r) < 1e-6 && r >= 0.0 && r < static_cast<double>(frames_.size())) {
      return &frames_[static_cast<std::size_t>(r)];
    }
    return nullptr;
  }

private:
  std::vector<ObstacleSnapshot> compute(double t) const
  {
    std::vector<ObstacleSnapshot> out;
    out.reserve(scenario_->obstacles.size());
    for (const auto &ob : scenario_->obstacles) {
      const ObstacleState st = ob.state_at(t);
      ObstacleSnapshot snap;
      snap.box = {Vec2(st.x, st.y), st.theta, ob.length, ob.width};
      // Entry: of the two corners nearest the corridor centerline, the one
      // further along the path.
      std::array<std::pair<double, double>, 4> proj{};
      std::array<Vec2, 4> corners = snap.box.corners();
      bool ok = true;
      for (std::size_t i = 0; i < 4 && ok; ++i) {
        try {
          const FrenetPoint fp = scenario_->reference.project(corners[i]);
          proj[i] = {std::abs(fp.d), fp.s};
        } catch (const DomainError &) {
          ok = false;
        }
      }
      if (ok) {
        std::array<std::size_t, 4> order = {0, 1, 2, 3};
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return proj[a].first < proj[b].first; });
        const std::size_t pick = proj[order[0]].second >= proj[order[1]].second ? order[0] : order[1];
        snap.has_entry = true;
        snap.entry = corners[pick];
      }
      out.push_back(snap);
    }
    return out;
  }

  const Scenario *scenario_;
  double dt_;
  std::vector<std::vector<ObstacleSnapshot>> frames_;
};

namespace detail
{

template <typename Fn>
void for_each_frame(const SceneCache &cache, const Trajectory &traj, Fn &&fn)
{
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const TrajState &s = traj.states[i];
    if (const auto *frame = cache.frame(s.t)) {
      fn(i, s, *frame);
    } else {
      fn(i, s, cache.at(s.t));
    }
  }
}

}  // namespace detail

/// Minimum footprint distance from the ego to any obstacle at one instant.
/// Obstacles provably at least `cutoff` away are skipped, so the result is
/// exact below `cutoff` and only known to be >= cutoff otherwise.
inline double min_obstacle_distance(const TrajState &ego, std::span<const ObstacleSnapshot> frame,
                                    double cutoff = std::numeric_limits<double>::infinity())
{
  const OrientedBox eb = ego_footprint(ego);
  const double ego_radius = eb.circumradius();
  double best = std::numeric_limits<double>::infinity();
  for (const auto &ob : frame) {
    const double lower = (ob.box.center - eb.center).norm() - ob.box.circumradius() - ego_radius;
    if (lower >= std::min(best, cutoff)) {
      best = std::min(best, std::max(lower, cutoff));
      continue;
    }
    best = std::min(best, box_distance(eb, ob.box));
  }
  return best;
}

namespace detail
{

/// Whether any part of the box lies strictly within `range` of `eye`.
inline bool within_range(const Vec2 &eye, const OrientedBox &box, double range)
{
  const double center = (box.center - eye).norm();
  if (center + box.circumradius() < range) {
    return true;
  }
  if (center - box.circumradius() >= range) {
    return false;
  }
  return point_box_distance(eye, box) < range;
}

}  // namespace detail

/// True when the ego footprint overlaps any obstacle at some state.
inline bool collides(const Trajectory &traj, const SceneCache &scene)
{
  bool hit = false;
  detail::for_each_frame(scene, traj, [&](std::size_t, const TrajState &s, const auto &frame) {
    if (hit) {
      return;
    }
    const OrientedBox eb = ego_footprint(s);
    for (const auto &ob : frame) {
      if ((ob.box.center - eb.center).norm() <= ob.box.circumradius() + eb.circumradius() &&
          boxes_overlap(eb, ob.box)) {
        hit = true;
        return;
      }
    }
  });
  return hit;
}

/// Kinematic cost terms (jerk_lon, jerk_lat, vel_offset, obstacle).
inline std::array<double, 4> eval_kinematic_costs(const Trajectory &traj, const SceneCache &scene,
                                                  double v_desired,
                                                  double d_safe = kSafetyDistance)
{
  const auto &st = traj.states;
  if (st.size() < 3) {
    throw DomainError("kinematic costs need a trajectory of at least three states");
  }
  const double dt = traj.dt;
  const std::size_t n = st.size();

  double jerk_lon = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double j = (st[i + 1].a - st[i].a) / dt;
    jerk_lon += j * j;
  }
  jerk_lon /= static_cast<double>(n - 1);

  std::vector<double> a_lat(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double dtheta = normalize_angle(st[i + 1].theta - st[i].theta);
    const double ds = std::max(std::hypot(st[i + 1].x - st[i].x, st[i + 1].y - st[i].y), kMinArcStep);
    a_lat[i] = st[i].v * st[i].v * dtheta / ds;
  }
  double jerk_lat = 0.0;
  for (std::size_t i = 0; i + 1 < a_lat.size(); ++i) {
    const double j = (a_lat[i + 1] - a_lat[i]) / dt;
    jerk_lat += j * j;
  }
  jerk_lat /= static_cast<double>(a_lat.size() - 1);

  double vel = 0.0;
  for (const auto &s : st) {
    vel += (s.v - v_desired) * (s.v - v_desired);
  }
  vel /= static_cast<double>(n);

  double obstacle = 0.0;
  detail::for_each_frame(scene, traj, [&](std::size_t, const TrajState &s, const auto &frame) {
    const double gap = d_safe - min_obstacle_distance(s, frame, d_safe);
    if (gap > 0.0) {
      obstacle += gap * gap;
    }
  });
  obstacle /= static_cast<double>(n);

  return {jerk_lon, jerk_lat, vel, obstacle};
}

inline std::array<double, 4> eval_kinematic_costs(const Trajectory &traj, const Scenario &scenario,
                                                  double v_desired,
                                                  double d_safe = kSafetyDistance)
{
  const SceneCache scene(scenario, traj.dt, 0.0);
  return eval_kinematic_costs(traj, scene, v_desired, d_safe);
}

/// Fraction of the sensor disc's angular extent hidden behind obstacles
/// within range of `eye`.
inline double occluded_fraction(const Vec2 &eye, std::span<const ObstacleSnapshot> frame,
                                double range = kSensorRange)
{
  std::vector<std::pair<double, double>> blocked;
  for (const auto &ob : frame) {
    if (!detail::within_range(eye, ob.box, range)) {
      continue;
    }
    double lo = 0.0, hi = 0.0;
    if (!angular_extent(eye, ob.box, lo, hi)) {
      return 1.0;
    }
    blocked.emplace_back(lo, hi);
  }
  if (blocked.empty()) {
    return 0.0;
  }
  return circular_union_length(blocked) / (2.0 * kPi);
}

/// Perception proxies (phantom, visibility).
///
/// phantom: mean over states of 1 / (1 + d_occ), d_occ the distance from the
/// ego's braking point (v^2 / 2b ahead, clamped at the entry) to the nearest
/// occluded corridor entry ahead of the ego and inside the sensor disc (a
/// state with no such entry contributes 0).
/// visibility: mean over states of the occluded fraction of the sensor disc.
inline std::array<double, 2> eval_perception_costs(const Trajectory &traj, const SceneCache &scene,
                                                   double range = kSensorRange)
{
  if (traj.states.empty()) {
    return {0.0, 0.0};
  }
  double phantom = 0.0, visibility = 0.0;
  detail::for_each_frame(scene, traj, [&](std::size_t, const TrajState &s, const auto &frame) {
    if (frame.empty()) {
      return;
    }
    const Vec2 eye = s.position();
    const Vec2 heading(std::cos(s.theta), std::sin(s.theta));
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto &ob : frame) {
      if (!ob.has_entry || !detail::within_range(eye, ob.box, range)) {
        continue;
      }
      const Vec2 rel = ob.entry - eye;
      if (rel.dot(heading) <= 0.0) {
        continue;
      }
      nearest = std::min(nearest, rel.norm());
    }
    if (std::isfinite(nearest)) {
      const double braking = s.v * s.v / (2.0 * kPhantomBraking);
      phantom += 1.0 / (1.0 + std::max(0.0, nearest - braking));
    }
    visibility += occluded_fraction(eye, frame, range);
  });
  const auto n = static_cast<double>(traj.states.size());
  return {phantom / n, visibility / n};
}

inline std::array<double, 2> eval_perception_costs(const Trajectory &traj, const Scenario &scenario)
{
  const SceneCache scene(scenario, traj.dt, 0.0);
  return eval_perception_costs(traj, scene);
}

/// Raised when no candidate survives the feasibility gate.
class PlannerFailure : public DataError
{
public:
  PlannerFailure(const std::string &what, std::array<std::size_t, 4> counts)
  : DataError(what), counts_(counts)
  {
  }

  const std::array<std::size_t, 4> &infeasible_counts() const { return counts_; }

private:
  std::array<std::size_t, 4> counts_;
};

inline std::string describe_counts(const std::array<std::size_t, 4> &counts)
{
  std::string out;
  for (std::size_t i = 0; i < 4; ++i) {
    out += (i ? ", " : "") + std::string(kInfeasibilityNames[i]) + "=" + std::to_string(counts[i]);
  }
  return out;
}

struct CandidateCost
{
  std::size_t index = 0;
  CostVector costs;
  double total = 0.0;
};

struct Selection
{
  std::size_t winner = 0;
  std::vector<CandidateCost> costs;
};

enum class PerceptionMode { compute, skip };

inline CostVector eval_costs(const Trajectory &traj, const SceneCache &scene, double v_desired,
                             PerceptionMode mode = PerceptionMode::compute)
{
  CostVector cv;
  cv.kin = eval_kinematic_costs(traj, scene, v_desired);
  if (mode == PerceptionMode::compute) {
    cv.ext = eval_perception_costs(traj, scene);
  }
  return cv;
}

/// Lowest-cost candidate among `indices` (first minimum in candidate order).
inline Selection select_best(std::span<const FrenetCandidate> candidates,
                             std::span<const std::size_t> indices, const StyleProfile &profile,
                             const SceneCache &scene, double v_desired,
                             std::array<std::size_t, 4> infeasible_counts = {},
                             PerceptionMode mode = PerceptionMode::compute)
{
  if (indices.empty()) {
    throw PlannerFailure("no feasible candidate (" + describe_counts(infeasible_counts) + ")",
                         infeasible_counts);
  }
  Selection sel;
  sel.costs.reserve(indices.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t idx : indices) {
    CandidateCost cc;
    cc.index = idx;
    cc.costs = eval_costs(candidates[idx].cartesian, scene, v_desired, mode);
    cc.total = total_cost(profile, cc.costs);
    if (cc.total < best) {
      best = cc.total;
      sel.winner = idx;
    }
    sel.costs.push_back(cc);
  }
  return sel;
}

inline Selection select_best(const CandidateSet &set, const StyleProfile &profile,
                             const SceneCache &scene, double v_desired,
                             PerceptionMode mode = PerceptionMode::compute)
{
  return select_best(set.all, set.feasible, profile, scene, v_desired, set.infeasible_counts, mode);
}

/// Treats every candidate in the list as feasible.
inline Selection select_best(std::span<const FrenetCandidate> feasible, const StyleProfile &profile,
                             const Scenario &scenario, double v_desired)
{
  std::vector<std::size_t> idx(feasible.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    idx[i] = i;
  }
  double dt = feasible.empty() ? 0.1 : feasible.front().cartesian.dt;
  const SceneCache scene(scenario, dt);
  return select_best(feasible, idx, profile, scene, v_desired);
}

/// One replanning step: ego context and the style-conditioned output.
struct PlanningInstance
{
  std::string scenario_id;
  Style style = Style::Default;
  std::size_t step = 0;
  double time = 0.0;
  TrajState ego;
  /// Six ego states at 10 Hz ending at the current state.
  std::vector<TrajState> history;
  Trajectory trajectory;

  bool operator==(const PlanningInstance &) const = default;
};

struct PlanOptions
{
  double replan_dt = 0.5;
  /// Drop feasible candidates whose footprint overlaps an obstacle.
  bool reject_collisions = true;
  /// Sampler grid; when unset the default grid around the desired speed.
  std::optional<SamplerConfig> sampler;
};

/// Receding-horizon planning of one scenario under one style. Stops at the
/// scenario duration or at the first step whose ego position lies in the
/// goal region (that step is not emitted).
inline std::vector<PlanningInstance> plan_scenario(const Scenario &scenario,
                                                   const StyleProfile &profile,
                                                   const PlanOptions &options = {})
{
  if (!(options.replan_dt > 0.0)) {
    throw ConfigError("replan_dt must be positive");
  }
  const double v_des = scenario.desired_speed();
  const SamplerConfig cfg = options.sampler.value_or(SamplerConfig::defaults(v_des));
  cfg.validate();
  const auto advance = static_cast<std::size_t>(std::llround(options.replan_dt / cfg.dt));
  const auto history_stride = static_cast<std::size_t>(std::llround(0.1 / cfg.dt));
  if (advance == 0 || std::abs(static_cast<double>(advance) * cfg.dt - options.replan_dt) > 1e-9) {
    throw ConfigError("replan_dt must be a multiple of the sampler dt");
  }
  if (history_stride == 0 || std::abs(static_cast<double>(history_stride) * cfg.dt - 0.1) > 1e-9) {
    throw ConfigError("sampler dt must divide the 0.1 s history spacing");
  }
  if (cfg.effective_horizon() + 1e-9 < options.replan_dt) {
    throw ConfigError("planning horizon shorter than the replanning interval");
  }

  const SceneCache scene(scenario, cfg.dt, cfg.effective_horizon() + options.replan_dt);
  std::vector<PlanningInstance> out;
  std::vector<TrajState> executed;

  TrajState ego = scenario.ego_init;
  FrenetState ego_frenet = cartesian_to_frenet(scenario.reference, ego);
  const double t_start = ego.t;
  for (std::size_t step = 0;; ++step) {
    const double t = t_start + static_cast<double>(step) * options.replan_dt;
    if (t - t_start >= scenario.duration - 1e-9) {
      break;
    }
    if (scenario.goal.contains(ego.x, ego.y)) {
      break;
    }
    ego.t = t;
    CandidateSet set = generate_candidates(scenario.reference, ego_frenet, cfg, t);
    std::size_t collisions = 0;
    if (options.reject_collisions) {
      std::erase_if(set.feasible, [&](std::size_t i) {
        const bool hit = collides(set.all[i].cartesian, scene);
        collisions += hit ? 1 : 0;
        return hit;
      });
    }
    Selection sel;
    try {
      sel = select_best(set, profile, scene, v_des);
    } catch (const PlannerFailure &e) {
      throw PlannerFailure(scenario.id + " step " + std::to_string(step) + ": " + e.what() +
                             ", collision=" + std::to_string(collisions),
                           e.infeasible_counts());
    }
    const FrenetCandidate &win = set.all[sel.winner];

    PlanningInstance inst;
    inst.scenario_id = scenario.id;
    inst.style = profile.style;
    inst.step = step;
    inst.time = t;
    inst.ego = win.cartesian.states.front();
    // History at 10 Hz ending at the current state; before the scenario
    // start it is extrapolated backwards at constant velocity.
    executed.push_back(inst.ego);
    for (int k = 5; k >= 0; --k) {
      const std::size_t back = static_cast<std::size_t>(k) * history_stride;
      if (back < executed.size()) {
        inst.history.push_back(executed[executed.size() - 1 - back]);
      } else {
        const TrajState &first = executed.front();
        const double lag = static_cast<double>(back - (executed.size() - 1)) * cfg.dt;
        TrajState s = first;
        s.t = first.t - lag;
        s.x = first.x - first.v * std::cos(first.theta) * lag;
        s.y = first.y - first.v * std::sin(first.theta) * lag;
        s.a = 0.0;
        inst.history.push_back(s);
      }
    }
    executed.pop_back();
    inst.trajectory = win.cartesian;
    out.push_back(std::move(inst));

    for (std::size_t k = 0; k < advance; ++k) {
      executed.push_back(win.cartesian.states[k]);
    }
    ego = win.cartesian.states[advance];
    ego_frenet = win.frenet[advance];
  }
  return out;
}

}  // namespace drivestyle
