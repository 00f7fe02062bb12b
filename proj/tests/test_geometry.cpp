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

TEST(Geometry, PointSegmentDistance)
{
  EXPECT_DOUBLE_EQ(point_segment_distance({0, 1}, {-1, 0}, {1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(point_segment_distance({3, 4}, {0, 0}, {0, 0}), 5.0);
  EXPECT_DOUBLE_EQ(point_segment_distance({4, 3}, {0, 0}, {1, 0}), std::hypot(3.0, 3.0));
}

TEST(Geometry, BoxOverlapAndDistance)
{
  const OrientedBox a{{0, 0}, 0.0, 4.0, 2.0};
  const OrientedBox b{{6, 0}, 0.0, 4.0, 2.0};
  EXPECT_FALSE(boxes_overlap(a, b));
  EXPECT_NEAR(box_distance(a, b), 2.0, 1e-12);
  const OrientedBox c{{3, 0}, kPi / 2.0, 4.0, 2.0};
  EXPECT_TRUE(boxes_overlap(a, c));
  EXPECT_EQ(box_distance(a, c), 0.0);
  EXPECT_NEAR(point_box_distance({0, 4}, a), 3.0, 1e-12);
  EXPECT_EQ(point_box_distance({0.5, 0.5}, a), 0.0);
}

TEST(Geometry, CircularUnionLength)
{
  EXPECT_NEAR(circular_union_length({{0.0, 1.0}, {0.5, 1.5}}), 1.5, 1e-12);
  EXPECT_NEAR(circular_union_length({{-0.5, 0.5}, {2 * kPi - 0.2, 2 * kPi + 0.1}}), 1.0, 1e-12);
  EXPECT_NEAR(circular_union_length({{0.0, 7.0}}), 2 * kPi, 1e-12);
  EXPECT_EQ(circular_union_length({}), 0.0);
}

TEST(Geometry, AngularExtentOfBoxAhead)
{
  const OrientedBox box{{10, 0}, 0.0, 2.0, 2.0};
  double lo = 0.0, hi = 0.0;
  ASSERT_TRUE(angular_extent({0, 0}, box, lo, hi));
  EXPECT_NEAR(hi - lo, 2.0 * std::atan2(1.0, 9.0), 1e-12);
  EXPECT_FALSE(angular_extent({10, 0}, box, lo, hi));
}

TEST(Polynomial, QuinticBoundaryConditions)
{
  const auto q = fit_quintic(1.0, 2.0, 0.5, 10.0, -1.0, 0.3, 3.0);
  EXPECT_NEAR(q.eval(0.0), 1.0, 1e-12);
  EXPECT_NEAR(q.eval(0.0, 1), 2.0, 1e-12);
  EXPECT_NEAR(q.eval(0.0, 2), 0.5, 1e-12);
  EXPECT_NEAR(q.eval(3.0), 10.0, 1e-9);
  EXPECT_NEAR(q.eval(3.0, 1), -1.0, 1e-9);
  EXPECT_NEAR(q.eval(3.0, 2), 0.3, 1e-9);
}

TEST(Polynomial, QuarticBoundaryConditions)
{
  const auto q = fit_quartic(0.0, 4.0, 1.0, 8.0, 0.0, 2.5);
  EXPECT_NEAR(q.eval(2.5, 1), 8.0, 1e-9);
  EXPECT_NEAR(q.eval(2.5, 2), 0.0, 1e-9);
  EXPECT_NEAR(q.eval(0.0, 2), 1.0, 1e-12);
}

TEST(Spline, ReproducesLinearData)
{
  const std::vector<double> x = {0.0, 1.0, 2.5, 4.0};
  const std::vector<double> y = {1.0, 3.0, 6.0, 9.0};
  const CubicSpline1D s(x, y);
  for (double t : {0.0, 0.3, 1.7, 3.9}) {
    EXPECT_NEAR(s.value(t), 1.0 + 2.0 * t, 1e-12);
    EXPECT_NEAR(s.first(t), 2.0, 1e-12);
    EXPECT_NEAR(s.second(t), 0.0, 1e-12);
  }
  EXPECT_THROW(CubicSpline1D(std::vector<double>{0.0, 0.0}, std::vector<double>{1.0, 2.0}),
               InvariantError);
}

TEST(Rng, DeterministicAndInRange)
{
  Rng a(7), b(7);
  for (int i = 0; i < 100; ++i) {
    const double u = a.uniform();
    EXPECT_EQ(u, b.uniform());
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(a.below(5), 5u);
    b.below(5);
  }
}

TEST(Common, NormalizeAngleAndFixed)
{
  EXPECT_NEAR(normalize_angle(3 * kPi), kPi, 1e-12);
  EXPECT_NEAR(normalize_angle(-kPi), kPi, 1e-12);
  EXPECT_EQ(fixed(-0.0001, 2), "0.00");
  EXPECT_EQ(fixed(1.005, 1), "1.0");
  EXPECT_EQ(hex64(fnv1a("")), "cbf29ce484222325");
}

}  // namespace
}  // namespace drivestyle
