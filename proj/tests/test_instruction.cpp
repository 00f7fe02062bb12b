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

using testing::static_box;
using testing::straight_scenario;

PlanningInstance instance_on(const Scenario &sc, Style style = Style::Comfort)
{
  PlanOptions opts;
  Scenario shorter = sc;
  shorter.duration = 1.0;
  auto inst = plan_scenario(shorter, builtin_profile(style), opts);
  return inst.front();
}

TEST(Response, StandardHorizonHasSevenStates)
{
  const PlanningInstance inst = instance_on(straight_scenario());
  const Json doc = Json::parse(format_response(inst.trajectory, Horizon::standard));
  ASSERT_EQ(doc["states"].size(), 7u);
  for (std::size_t i = 0; i < 7; ++i) {
    const Json &s = doc["states"][i];
    EXPECT_EQ(s.size(), 6u);
    for (const char *key : {"t", "x", "y", "v", "a", "theta"}) {
      EXPECT_TRUE(s.contains(key)) << key;
    }
    EXPECT_NEAR(s["t"].get<double>(), 0.5 * static_cast<double>(i), 1e-12);
  }
}

TEST(Response, ExtendedHorizonHasElevenStates)
{
  const PlanningInstance inst = instance_on(straight_scenario());
  const PredictedSequence seq = parse_response(format_response(inst.trajectory, Horizon::extended));
  EXPECT_EQ(seq.size(), 11);
  EXPECT_EQ(seq.dt, 0.5);
  EXPECT_TRUE(seq.kinematic);
}

TEST(Response, EgoFrameStartsAtOrigin)
{
  const PlanningInstance inst = instance_on(straight_scenario());
  const PredictedSequence seq = parse_response(format_response(inst.trajectory, Horizon::standard));
  EXPECT_EQ(seq.states(0, kX), 0.0);
  EXPECT_EQ(seq.states(0, kY), 0.0);
  EXPECT_EQ(seq.states(0, kTheta), 0.0);
  EXPECT_GT(seq.states(6, kX), 0.0);
}

TEST(Response, PositionsOnlyIsNotKinematic)
{
  const auto seq = parse_response(std::string(R"({"states": [{"x": 0, "y": 0}, {"x": 1, "y": 0}]})"));
  EXPECT_FALSE(seq.kinematic);
  EXPECT_THROW(parse_response(std::string(R"({"states": [{"x": 0}]})")), SchemaError);
}

TEST(Samples, FpvOmitsTrafficAgents)
{
  const Scenario sc = generate_synthetic_scenario(ScenarioKind::crossing, 5);
  const PlanningInstance inst = instance_on(sc);
  const VqaSample bev = build_bev_sample(inst, sc, Horizon::standard);
  const VqaSample fpv = build_fpv_sample(inst, sc, "images/fpv/x.png", Horizon::standard);
  EXPECT_NE(bev.conversations[0].value.find("Traffic Agents"), std::string::npos);
  EXPECT_EQ(fpv.conversations[0].value.find("Traffic Agents"), std::string::npos);
  EXPECT_EQ(fpv.conversations[0].value.find("agent "), std::string::npos);
  EXPECT_NE(fpv.conversations[0].value.find("Ego-Vehicle History"), std::string::npos);
  EXPECT_NE(fpv.conversations[0].value.find("Goal Point"), std::string::npos);
  EXPECT_NE(fpv.conversations[0].value.find("Style Command"), std::string::npos);
  EXPECT_EQ(bev.conversations[1].value, fpv.conversations[1].value);
  EXPECT_EQ(fpv.image, "images/fpv/x.png");
  EXPECT_THROW(build_fpv_sample(inst, sc, "", Horizon::standard), ConfigError);
}

TEST(Samples, ByteStableHumanMessage)
{
  const Scenario sc = generate_synthetic_scenario(ScenarioKind::lane_obstacle, 5);
  const PlanningInstance inst = instance_on(sc);
  EXPECT_EQ(sample_to_json(build_bev_sample(inst, sc, Horizon::extended)).dump(),
            sample_to_json(build_bev_sample(inst, sc, Horizon::extended)).dump());
}

TEST(Samples, EmissionIsLossless)
{
  const Scenario sc = straight_scenario();
  const PlanningInstance inst = instance_on(sc);
  const VqaSample s = build_bev_sample(inst, sc, Horizon::extended);
  const PredictedSequence pred = parse_response(s.conversations[1].value);
  // Ground truth resampled at 2 Hz in the ego frame of the first state.
  PredictedSequence gt = pred;
  for (Eigen::Index i = 0; i < gt.size(); ++i) {
    const TrajState &st = inst.trajectory.states[static_cast<std::size_t>(5 * i)];
    gt.states.row(i) << st.x - inst.ego.x, st.y - inst.ego.y, st.v, st.a, st.theta;
  }
  const Displacement d = displacement_metrics(pred, gt);
  EXPECT_LT(d.ade, 1e-4);
  EXPECT_LT(d.fde, 1e-4);
  EXPECT_NEAR(*kce(pred), *kce(gt), 1e-3);
}

TEST(Dataset, EmptyAndRoundTrip)
{
  EXPECT_EQ(serialize_dataset({}), "[]\n");
  EXPECT_TRUE(parse_dataset("[]").empty());
  const Json m = dataset_manifest({});
  EXPECT_EQ(m["count"], 0);
  for (const auto &[k, v] : m["per_style"].items()) {
    EXPECT_EQ(v, 0) << k;
  }

  const Scenario sc = generate_synthetic_scenario(ScenarioKind::curve, 4);
  std::vector<VqaSample> samples;
  for (Style st : kAllStyles) {
    const PlanningInstance inst = instance_on(sc, st);
    samples.push_back(build_bev_sample(inst, sc, Horizon::standard));
    samples.push_back(build_fpv_sample(inst, sc, "images/fpv/a.png", Horizon::extended));
  }
  for (bool lines : {false, true}) {
    const std::string text = serialize_dataset(samples, lines);
    const auto back = parse_dataset(text);
    ASSERT_EQ(back.size(), samples.size());
    EXPECT_EQ(serialize_dataset(back, lines), text);
    for (std::size_t i = 0; i < back.size(); ++i) {
      EXPECT_EQ(back[i].id, samples[i].id);
      EXPECT_EQ(back[i].style, samples[i].style);
      EXPECT_EQ(back[i].domain, samples[i].domain);
      EXPECT_EQ(back[i].horizon, samples[i].horizon);
    }
  }
  const Json manifest = dataset_manifest(samples);
  for (Style st : kAllStyles) {
    EXPECT_EQ(manifest["per_style"][std::string(to_string(st))], 2);
  }
  EXPECT_EQ(manifest["per_domain"]["bev"], 5);
  EXPECT_EQ(manifest["per_horizon"]["5s"], 5);
}

TEST(Agents, NearestFirstWithIdTieBreak)
{
  Scenario sc = straight_scenario();
  sc.obstacles = {static_box("7", 25.0, 3.0, 4, 2), static_box("3", 25.0, -3.0, 4, 2),
                  static_box("9", 15.0, 0.0, 4, 2), static_box("far", 60.0, 0.0, 4, 2)};
  const auto agents = nearest_agents(sc, sc.ego_init);
  ASSERT_EQ(agents.size(), 3u);
  EXPECT_EQ(agents[0].id, "9");
  EXPECT_EQ(agents[1].id, "3");
  EXPECT_EQ(agents[2].id, "7");
  EXPECT_EQ(nearest_agents(sc, sc.ego_init, 1).size(), 1u);
}

TEST(Bev, EmptySceneHasOnlyRoadAndEgo)
{
  Scenario sc = straight_scenario();
  const std::string svg = render_bev(sc, sc.ego_init);
  EXPECT_NE(svg.find("class=\"ego\""), std::string::npos);
  EXPECT_NE(svg.find("class=\"reference\""), std::string::npos);
  EXPECT_EQ(svg.find("class=\"static\""), std::string::npos);
  EXPECT_EQ(svg.find("class=\"dynamic\""), std::string::npos);
  EXPECT_EQ(svg.find("class=\"goal\""), std::string::npos);
}

TEST(Bev, ClipsBeyondThirtyMetres)
{
  Scenario sc = straight_scenario();
  sc.obstacles = {static_box("far", sc.ego_init.x + 31.0, 0.0, 4, 2)};
  EXPECT_EQ(render_bev(sc, sc.ego_init).find("class=\"static\""), std::string::npos);
  sc.obstacles = {static_box("near", sc.ego_init.x + 29.0, 0.0, 4, 2)};
  EXPECT_NE(render_bev(sc, sc.ego_init).find("class=\"static\""), std::string::npos);
}

TEST(Bev, Deterministic)
{
  const Scenario sc = generate_synthetic_scenario(ScenarioKind::crossing, 11);
  EXPECT_EQ(render_bev(sc, sc.ego_init), render_bev(sc, sc.ego_init));
}

TEST(SampleIds, ParseBack)
{
  const Scenario sc = straight_scenario();
  const PlanningInstance inst = instance_on(sc, Style::Safety);
  const VqaSample s = build_fpv_sample(inst, sc, "img.png", Horizon::extended);
  const SampleKey k = parse_sample_id(s.id);
  EXPECT_EQ(k.scenario_id, sc.id);
  EXPECT_EQ(k.style, Style::Safety);
  EXPECT_EQ(k.domain, Domain::fpv);
  EXPECT_EQ(k.horizon, Horizon::extended);
  EXPECT_EQ(k.step, 0u);
}

}  // namespace
}  // namespace drivestyle
