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
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "drivestyle/common.hpp"
#include "drivestyle/polynomial.hpp"
#include "drivestyle/scenario.hpp"

namespace drivestyle
{

struct FeasibilityLimits
{
  double a_max = 8.0;
  double kappa_max = 0.2;
  double yaw_rate_max = 1.0;
  double v_max = 36.0;

  void validate() const
  {
    if (!(a_max > 0.0 && kappa_max > 0.0 && yaw_rate_max > 0.0 && v_max > 0.0)) {
      throw ConfigError("feasibility limits must all be strictly positive");
    }
  }
};

enum class Infeasibility { accel = 0, curvature = 1, yaw_rate = 2, speed = 3 };

inline constexpr std::array<std::string_view, 4> kInfeasibilityNames = {"accel", "curvature",
                                                                        "yaw_rate", "speed"};

inline std::string_view to_string(Infeasibility r)
{
  return kInfeasibilityNames[static_cast<std::size_t>(r)];
}

struct SamplerConfig
{
  std::vector<double> lateral_offsets;
  std::vector<double> target_speeds;
  /// Maneuver durations T.
  std::vector<double> horizons;
  double dt = 0.1;
  /// Every candidate is sampled out to this time; after its maneuver ends it
  /// keeps the terminal lateral offset and speed. Zero means "longest T".
  double planning_horizon = 5.0;
  FeasibilityLimits limits;

  /// Default grid: 11 offsets in [-3, 3] m, 11 speeds in [0, 1.2 v_ref]
  /// (0.1 v_ref apart from 0.4 v_ref up),
  /// maneuvers of 2, 3, 4 s at 10 Hz.
  static SamplerConfig defaults(double v_ref)
  {
    SamplerConfig cfg;
    for (int i = 0; i <= 10; ++i) {
      cfg.lateral_offsets.push_back(-3.0 + 0.6 * i);
    }
    cfg.lateral_offsets[5] = 0.0;
    for (double f : {0.0, 0.2, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2}) {
      cfg.target_speeds.push_back(v_ref * f);
    }
    cfg.horizons = {2.0, 3.0, 4.0};
    return cfg;
  }

  double effective_horizon() const
  {
    double longest = 0.0;
    for (double T : horizons) {
      longest = std::max(longest, T);
    }
    return std::max(longest, planning_horizon);
  }

  void validate() const
  {
    if (lateral_offsets.empty() || target_speeds.empty() || horizons.empty()) {
      throw ConfigError("sampler grid must have at least one offset, speed and horizon");
    }
    if (!std::is_sorted(lateral_offsets.begin(), lateral_offsets.end())) {
      throw ConfigError("lateral offsets must be sorted");
    }
    for (double v : target_speeds) {
      if (!(v >= 0.0)) {
        throw ConfigError("target speeds must be non-negative");
      }
    }
    if (!(dt > 0.0)) {
      throw ConfigError("sampler dt must be positive");
    }
    auto divides = [&](double T) {
      const double steps = T / dt;
      return std::abs(steps - std::round(steps)) < 1e-9 * std::max(1.0, steps);
    };
    for (double T : horizons) {
      if (!(T > 0.0) || !divides(T)) {
        throw ConfigError("horizon " + fixed(T, 3) + " s must be positive and a multiple of dt");
      }
    }
    if (planning_horizon < 0.0 || (planning_horizon > 0.0 && !divides(planning_horizon))) {
      throw ConfigError("planning horizon must be a non-negative multiple of dt");
    }
    limits.validate();
  }
};

struct EndState
{
  double d_target = 0.0;
  double s_dot_target = 0.0;
  double T = 0.0;
  bool operator==(const EndState &) const = default;
};

struct FeasibilityResult
{
  bool feasible = true;
  std::optional<Infeasibility> reason;
};

/// Candidate trajectory: quintic lateral d(t), quartic velocity-keeping s(t).
struct FrenetCandidate
{
  EndState end;
  QuinticPolynomial lat;
  QuarticPolynomial lon;
  double T = 0.0;
  std::vector<FrenetState> frenet;
  Trajectory cartesian;
  bool feasible = false;
  std::optional<Infeasibility> infeasibility_reason;

  /// Curvilinear state at time t, continuing past T with the terminal
  /// offset and speed.
  FrenetState state_at(double t) const
  {
    FrenetState f;
    if (t <= T) {
      f.s = lon.eval(t);
      f.s_dot = lon.eval(t, 1);
      f.s_ddot = lon.eval(t, 2);
      f.d = lat.eval(t);
      f.d_dot = lat.eval(t, 1);
      f.d_ddot = lat.eval(t, 2);
    } else {
      f.s_dot = lon.eval(T, 1);
      f.s = lon.eval(T) + f.s_dot * (t - T);
      f.d = lat.eval(T);
    }
    return f;
  }
};

/// End-state grid in lexicographic (d, s_dot, T) order.
inline std::vector<EndState> sample_end_states(const SamplerConfig &config)
{
  config.validate();
  std::vector<EndState> out;
  out.reserve(config.lateral_offsets.size() * config.target_speeds.size() *
              config.horizons.size());
  for (double d : config.lateral_offsets) {
    for (double v : config.target_speeds) {
      for (double T : config.horizons) {
        out.push_back({d, v, T});
      }
    }
  }
  return out;
}

/// Builds the polynomial pair for one end state and samples it every dt
/// from 0 to max(T, horizon). The Cartesian trajectory is filled separately.
inline FrenetCandidate build_candidate(const FrenetState &ego, const EndState &end, double dt,
                                       double horizon = 0.0)
{
  if (!(dt > 0.0)) {
    throw DomainError("candidate dt must be positive");
  }
  const double steps = end.T / dt;
  if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps)) {
    throw DomainError("maneuver duration " + fixed(end.T, 3) + " s is not a multiple of dt");
  }
  if (end.T <= 2.0 * dt + 1e-12) {
    throw DomainError("degenerate maneuver duration " + fixed(end.T, 3) + " s (needs T > 2 dt)");
  }
  FrenetCandidate c;
  c.end = end;
  c.T = end.T;
  c.lat = fit_quintic(ego.d, ego.d_dot, ego.d_ddot, end.d_target, 0.0, 0.0, end.T);
  c.lon = fit_quartic(ego.s, ego.s_dot, ego.s_ddot, end.s_dot_target, 0.0, end.T);
  const auto n = static_cast<std::size_t>(std::llround(std::max(end.T, horizon) / dt));
  c.frenet.reserve(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    c.frenet.push_back(c.state_at(static_cast<double>(k) * dt));
  }
  // Exact initial conditions regardless of polynomial round-off.
  c.frenet.front() = ego;
  return c;
}

/// Floor on the arc-length step used for discrete curvature.
inline constexpr double kMinArcStep = 1e-6;

/// Kinematic gate. Bounds are checked in the fixed order accel, curvature,
/// yaw rate, speed; the first violated one is reported.
inline FeasibilityResult check_feasibility(const Trajectory &traj, const FeasibilityLimits &limits)
{
  const auto &st = traj.states;
  for (const auto &s : st) {
    if (std::abs(s.a) > limits.a_max) {
      return {false, Infeasibility::accel};
    }
  }
  for (std::size_t i = 0; i + 1 < st.size(); ++i) {
    const double dtheta = normalize_angle(st[i + 1].theta - st[i].theta);
    const double ds = std::max(std::hypot(st[i + 1].x - st[i].x, st[i + 1].y - st[i].y), kMinArcStep);
    if (std::abs(dtheta / ds) > limits.kappa_max) {
      return {false, Infeasibility::curvature};
    }
  }
  for (std::size_t i = 0; i + 1 < st.size(); ++i) {
    const double dtheta = normalize_angle(st[i + 1].theta - st[i].theta);
    if (std::abs(dtheta / traj.dt) > limits.yaw_rate_max) {
      return {false, Infeasibility::yaw_rate};
    }
  }
  for (const auto &s : st) {
    if (s.v < 0.0 || s.v > limits.v_max) {
      return {false, Infeasibility::speed};
    }
  }
  return {true, std::nullopt};
}

inline FeasibilityResult check_feasibility(const FrenetCandidate &candidate,
                                           const FeasibilityLimits &limits)
{
  if (candidate.cartesian.states.empty()) {
    throw DomainError("feasibility check needs the Cartesian trajectory");
  }
  return check_feasibility(candidate.cartesian, limits);
}

struct CandidateSet
{
  std::vector<FrenetCandidate> all;
  /// Indices into `all`, in candidate order.
  std::vector<std::size_t> feasible;
  std::array<std::size_t, 4> infeasible_counts{};
};

/// Samples, converts and gates the full candidate pool for one planning step.
inline CandidateSet generate_candidates(const ReferencePath &reference, const FrenetState &ego,
                                        const SamplerConfig &config, double t0 = 0.0)
{
  CandidateSet set;
  const auto ends = sample_end_states(config);
  set.all.reserve(ends.size());
  const double horizon = config.effective_horizon();
  for (const auto &end : ends) {
    FrenetCandidate c = build_candidate(ego, end, config.dt, horizon);
    c.cartesian = frenet_to_cartesian(reference, c.frenet, config.dt, t0);
    const FeasibilityResult r = check_feasibility(c, config.limits);
    c.feasible = r.feasible;
    c.infeasibility_reason = r.reason;
    if (r.feasible) {
      set.feasible.push_back(set.all.size());
    } else {
      ++set.infeasible_counts[static_cast<std::size_t>(*r.reason)];
    }
    set.all.push_back(std::move(c));
  }
  return set;
}

inline CandidateSet generate_candidates(const Scenario &scenario, const TrajState &ego,
                                        const SamplerConfig &config)
{
  return generate_candidates(scenario.reference, cartesian_to_frenet(scenario.reference, ego),
                             config, ego.t);
}

}  // namespace drivestyle
