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

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace drivestyle
{
namespace
{

SamplerConfig grid(std::vector<double> d, std::vector<double> v, std::vector<double> T)
{
  SamplerConfig cfg;
  cfg.lateral_offsets = std::move(d);
  cfg.target_speeds = std::move(v);
  cfg.horizons = std::move(T);
  cfg.planning_horizon = 0.0;
  return cfg;
}

TEST(EndStates, Cardinality)
{
  EXPECT_EQ(sample_end_states(grid({-1, 0, 1}, {2, 4, 6, 8}, {3})).size(), 12u);
}

TEST(EndStates, LexicographicOrder)
{
  const auto ends = sample_end_states(grid({-1, 0, 1}, {5}, {3}));
  ASSERT_EQ(ends.size(), 3u);
  EXPECT_EQ(ends.front(), (EndState{-1.0, 5.0, 3.0}));
  EXPECT_EQ(ends.back(), (EndState{1.0, 5.0, 3.0}));
}

TEST(EndStates, ElevenByElevenTwoHorizons)
{
  std::vector<double> d, v;
  for (int i = 0; i < 11; ++i) {
    d.push_back(-2.5 + 0.5 * i);
    v.push_back(1.0 * i);
  }
  EXPECT_EQ(sample_end_states(grid(d, v, {2, 3})).size(), 242u);
}

TEST(EndStates, DefaultGrid)
{
  const SamplerConfig cfg = SamplerConfig::defaults(10.0);
  EXPECT_EQ(sample_end_states(cfg).size(), 11u * 11u * 3u);
  EXPECT_DOUBLE_EQ(cfg.target_speeds.back(), 12.0);
  EXPECT_DOUBLE_EQ(cfg.lateral_offsets[5], 0.0);
}

TEST(EndStates, InvalidGridIsConfigError)
{
  EXPECT_THROW(sample_end_states(grid({}, {5}, {3})), ConfigError);
  EXPECT_THROW(sample_end_states(grid({1, 0}, {5}, {3})), ConfigError);
  EXPECT_THROW(sample_end_states(grid({0}, {5}, {3.05})), ConfigError);
}

TEST(Polynomials, ZeroLateralMotion)
{
  const FrenetCandidate c = build_candidate({0, 5, 0, 0, 0, 0}, {0.0, 5.0, 3.0}, 0.1);
  for (double coeff : c.lat.coefficients()) {
    EXPECT_EQ(coeff, 0.0);
  }
}

TEST(Polynomials, ConstantSpeedLongitudinal)
{
  const FrenetCandidate c = build_candidate({12.0, 5, 0, 0, 0, 0}, {0.0, 5.0, 3.0}, 0.1);
  for (const auto &f : c.frenet) {
    const double t = static_cast<double>(&f - c.frenet.data()) * 0.1;
    EXPECT_NEAR(f.s, 12.0 + 5.0 * t, 1e-12);
    EXPECT_NEAR(f.s_dot, 5.0, 1e-12);
  }
}

TEST(Polynomials, SymmetricLaneChangeMidpoint)
{
  const FrenetCandidate c = build_candidate({0, 5, 0, 2.0, 0, 0}, {0.0, 5.0, 4.0}, 0.1);
  EXPECT_NEAR(c.lat.eval(2.0), 1.0, 1e-9);
  EXPECT_NEAR(c.lat.eval(4.0), 0.0, 1e-9);
  EXPECT_NEAR(c.lat.eval(4.0, 1), 0.0, 1e-9);
}

TEST(Polynomials, HoldsTerminalStateBeyondManeuver)
{
  const FrenetCandidate c = build_candidate({0, 5, 0, 1.0, 0, 0}, {0.0, 8.0, 2.0}, 0.1, 5.0);
  ASSERT_EQ(c.frenet.size(), 51u);
  const FrenetState end = c.frenet.back();
  EXPECT_NEAR(end.s_dot, 8.0, 1e-9);
  EXPECT_NEAR(end.d, 0.0, 1e-9);
  EXPECT_NEAR(end.s, c.lon.eval(2.0) + 8.0 * 3.0, 1e-9);
}

TEST(Polynomials, DegenerateDurationRejected)
{
  EXPECT_THROW(build_candidate({}, {0.0, 5.0, 0.2}, 0.1), DomainError);
  EXPECT_THROW(build_candidate({}, {0.0, 5.0, 1.05}, 0.1), DomainError);
}

TEST(Feasibility, ConstantSpeedIsFeasible)
{
  const auto r = check_feasibility(testing::constant_speed(10.0, 3.0), FeasibilityLimits{});
  EXPECT_TRUE(r.feasible);
  EXPECT_FALSE(r.reason.has_value());
}

TEST(Feasibility, AccelerationBound)
{
  Trajectory traj = testing::constant_speed(10.0, 3.0);
  traj.states[7].a = 10.0;
  const auto r = check_feasibility(traj, FeasibilityLimits{});
  EXPECT_FALSE(r.feasible);
  EXPECT_EQ(r.reason, Infeasibility::accel);
}

TEST(Feasibility, YawRateBound)
{
  // Quarter turn in 1 s at 10 m/s: yaw rate pi/2 per s, curvature 0.157 1/m.
  Trajectory traj;
  traj.dt = 0.1;
  double x = 0.0, y = 0.0;
  for (int i = 0; i <= 10; ++i) {
    const double theta = 0.5 * kPi * i / 10.0;
    traj.states.push_back({0.1 * i, x, y, 10.0, 0.0, theta});
    x += 1.0 * std::cos(theta + 0.05 * kPi / 2.0);
    y += 1.0 * std::sin(theta + 0.05 * kPi / 2.0);
  }
  FeasibilityLimits limits;
  limits.yaw_rate_max = 0.5;
  const auto r = check_feasibility(traj, limits);
  EXPECT_FALSE(r.feasible);
  EXPECT_EQ(r.reason, Infeasibility::yaw_rate);
}

TEST(Feasibility, SpeedAndCurvatureBounds)
{
  Trajectory fast = testing::constant_speed(40.0, 1.0);
  EXPECT_EQ(check_feasibility(fast, FeasibilityLimits{}).reason, Infeasibility::speed);
  Trajectory kink = testing::constant_speed(1.0, 1.0);
  kink.states[5].theta = 0.3;
  EXPECT_EQ(check_feasibility(kink, FeasibilityLimits{}).reason, Infeasibility::curvature);
}

TEST(Candidates, TightLimitsRejectEverything)
{
  const ReferencePath ref = testing::straight_path(200.0);
  SamplerConfig cfg = grid({-1, 0, 1}, {4, 6, 8, 10}, {3});
  cfg.limits.a_max = 0.01;
  const auto set = generate_candidates(ref, {5.0, 6.0, 1.0, 0.0, 0.0, 0.0}, cfg);
  EXPECT_EQ(set.all.size(), 12u);
  EXPECT_TRUE(set.feasible.empty());
  EXPECT_EQ(set.infeasible_counts[static_cast<std::size_t>(Infeasibility::accel)], 12u);
}

TEST(Candidates, PermissiveLimitsKeepEverything)
{
  const ReferencePath ref = testing::straight_path(200.0);
  const SamplerConfig cfg = grid({-1, 0, 1}, {4, 6, 8, 10}, {3});
  const auto set = generate_candidates(ref, {5.0, 6.0, 0.0, 0.0, 0.0, 0.0}, cfg);
  EXPECT_EQ(set.feasible.size(), 12u);
  for (const auto &c : set.all) {
    EXPECT_TRUE(c.feasible);
    EXPECT_EQ(c.cartesian.size(), 31u);
  }
}

TEST(Candidates, Deterministic)
{
  const ReferencePath ref = testing::arc_path(60.0, kPi / 2.0);
  const SamplerConfig cfg = SamplerConfig::defaults(8.0);
  const FrenetState ego{10.0, 8.0, 0.0, 0.2, 0.0, 0.0};
  const auto a = generate_candidates(ref, ego, cfg);
  const auto b = generate_candidates(ref, ego, cfg);
  ASSERT_EQ(a.all.size(), b.all.size());
  EXPECT_EQ(a.feasible, b.feasible);
  for (std::size_t i = 0; i < a.all.size(); ++i) {
    EXPECT_EQ(a.all[i].cartesian, b.all[i].cartesian);
  }
}

}  // namespace
}  // namespace drivestyle
