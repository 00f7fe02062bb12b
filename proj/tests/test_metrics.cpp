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

#include "gradient_check.hpp"
#include "score_check.hpp"
#include "test_support.hpp"

namespace drivestyle
{
namespace
{

PredictedSequence straight_gt(int n = 7)
{
  PredictedSequence s;
  s.dt = 0.5;
  s.states.resize(n, kChannels);
  for (int i = 0; i < n; ++i) {
    s.states.row(i) << 5.0 * 0.5 * i, 0.0, 5.0, 0.0, 0.0;
  }
  return s;
}

TEST(Displacement, Examples)
{
  const PredictedSequence gt = straight_gt();
  auto d = displacement_metrics(gt, gt);
  EXPECT_EQ(d.ade, 0.0);
  EXPECT_EQ(d.fde, 0.0);

  PredictedSequence shifted = gt;
  shifted.states.col(kX).array() += 1.0;
  d = displacement_metrics(shifted, gt);
  EXPECT_NEAR(d.ade, 1.0, 1e-12);
  EXPECT_NEAR(d.fde, 1.0, 1e-12);

  PredictedSequence last = gt;
  last.states(6, kY) += 2.0;
  d = displacement_metrics(last, gt);
  EXPECT_NEAR(d.ade, 2.0 / 7.0, 1e-12);
  EXPECT_NEAR(d.fde, 2.0, 1e-12);

  EXPECT_THROW(displacement_metrics(straight_gt(5), gt), DomainError);
}

TEST(Kce, Examples)
{
  EXPECT_NEAR(*kce(straight_gt()), 0.0, 1e-12);
  PredictedSequence two = straight_gt(2);
  two.states(1, kX) += 0.3;
  two.states(1, kY) += 0.4;
  EXPECT_NEAR(*kce(two), 0.5, 1e-12);
  two.kinematic = false;
  EXPECT_FALSE(kce(two).has_value());
}

TEST(Kce, PlannerStraightTrajectoryIsConsistent)
{
  const Scenario sc = testing::straight_scenario(6.0, 4.0);
  const auto inst = plan_scenario(sc, builtin_profile(Style::Sporty));
  ASSERT_FALSE(inst.empty());
  for (const auto &i : inst) {
    EXPECT_LT(*kce(PredictedSequence::from_trajectory(i.trajectory)), 1e-9);
  }
}

TEST(SampleMetricsTest, ThresholdsAndWrapping)
{
  const PredictedSequence gt = straight_gt();
  PredictedSequence pred = gt;
  pred.states.col(kY).array() += 0.99;
  EXPECT_TRUE(sample_metrics(pred, gt).success);

  pred = gt;
  pred.states(6, kY) += 2.0 * 7.0 / 7.0;
  const SampleMetrics m = sample_metrics(pred, gt);
  EXPECT_EQ(m.fde, 2.0);
  EXPECT_FALSE(m.miss);

  pred = gt;
  pred.states(0, kTheta) = 2.0 * kPi - 0.1;
  EXPECT_NEAR(*sample_metrics(pred, gt).mae_theta, 0.1 / 7.0, 1e-12);
}

TEST(CompositeScore, PerfectPrediction)
{
  const ScoreBreakdown s = composite_score({1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0});
  EXPECT_EQ(*s.s_final, 1.0);
}

TEST(CompositeScore, ReportedRowImpliesValidKinematicScore)
{
  const ScoreInputs row{0.1638, 0.6621, 1.72, 4.37, 0.11, std::nullopt, std::nullopt};
  const ScoreBreakdown s = composite_score(row);
  const double known = 0.35 * 0.1638 + 0.30 * (1 - 0.6621) +
                       0.20 * (0.4 * std::exp(-1.72 / 1.5) + 0.6 * std::exp(-4.37 / 3.0));
  EXPECT_NEAR(s.known_part, known, 1e-15);
  EXPECT_NEAR(s.known_part, 0.212, 1e-3);
  EXPECT_FALSE(s.s_final.has_value());
  const double s_kin = implied_kinematic_score(0.32, row);
  EXPECT_NEAR(s_kin, 0.72, 5e-3);
  EXPECT_GE(s_kin, 0.0);
  EXPECT_LE(s_kin, 1.0);
}

TEST(CompositeScore, VelocityClamp)
{
  EXPECT_EQ(*composite_score({1, 0, 0, 0, 0, 3.0, 0}).s_vel, 0.0);
  EXPECT_EQ(*composite_score({1, 0, 0, 0, 0, 7.0, 0}).s_vel, 0.0);
}

TEST(CompositeScore, MonotoneAndBounded)
{
  EXPECT_EQ(testing::score_property_violations(1000, 77), 0u);
}

std::vector<EvalPair> pairs_of(std::size_t n, std::size_t generated, std::uint64_t seed)
{
  Rng rng(seed);
  std::vector<EvalPair> out;
  for (std::size_t i = 0; i < n; ++i) {
    EvalPair p;
    p.id = "s" + std::to_string(i);
    p.style = i % 2 == 0 ? "Comfort" : "Sporty";
    p.gt = testing::random_sequence(rng, 7);
    if (i < generated) {
      p.pred = testing::random_sequence(rng, 7);
    }
    out.push_back(std::move(p));
  }
  return out;
}

TEST(Report, GenerationRate)
{
  const MetricsReport r = build_report(pairs_of(10, 9, 1));
  EXPECT_EQ(r.overall.n_total, 10u);
  EXPECT_EQ(r.overall.n_generated, 9u);
  EXPECT_NEAR(r.overall.generation_rate(), 0.9, 1e-15);
  EXPECT_EQ(r.per_style.at("Comfort").n_total, 5u);
  EXPECT_EQ(r.per_style.at("Sporty").n_generated, 4u);
}

TEST(Report, PerfectPredictions)
{
  auto pairs = pairs_of(6, 0, 2);
  for (auto &p : pairs) {
    p.pred = p.gt;
  }
  for (auto mode : {AggregationMode::per_sample_mean, AggregationMode::aggregate_then_score}) {
    const MetricsReport r = build_report(pairs, mode);
    EXPECT_EQ(r.overall.ade, 0.0);
    EXPECT_EQ(r.overall.fde, 0.0);
    // KCE of random ground truth is not zero, so S_final reaches 1 only
    // through the consistency term; check everything else is perfect.
    EXPECT_EQ(r.overall.psr, 1.0);
    EXPECT_EQ(r.overall.mr, 0.0);
  }
  auto clean = pairs;
  for (auto &p : clean) {
    p.gt = straight_gt();
    p.pred = p.gt;
  }
  EXPECT_EQ(*build_report(clean).overall.s_final, 1.0);
}

TEST(Report, NothingGenerated)
{
  const MetricsReport r = build_report(pairs_of(4, 0, 3));
  EXPECT_EQ(r.overall.n_generated, 0u);
  EXPECT_EQ(*r.overall.s_final, 0.0);
  EXPECT_FALSE(r.overall.ade.has_value());
  const Json j = report_to_json(r);
  EXPECT_TRUE(j["ade"].is_null());
}

TEST(Report, ModesAgreeOnIdenticalSamples)
{
  auto pairs = pairs_of(1, 1, 4);
  pairs.resize(5, pairs.front());
  const double a = *build_report(pairs, AggregationMode::per_sample_mean).overall.s_final;
  const double b = *build_report(pairs, AggregationMode::aggregate_then_score).overall.s_final;
  EXPECT_NEAR(a, b, 1e-15);
}

TEST(Report, CsvHasHeaderAndRows)
{
  const std::string csv = report_to_csv(build_report(pairs_of(4, 4, 5)));
  EXPECT_EQ(csv.rfind("group,n_total,n_generated,psr,mr,ade,fde,kce,mae_v,mae_theta,s_final\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

}  // namespace
}  // namespace drivestyle
