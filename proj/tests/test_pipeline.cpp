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

#include <fstream>

#include "test_support.hpp"

namespace drivestyle
{
namespace
{

using testing::read_file;
using testing::run_cli;
using testing::scratch_dir;

/// A corpus small enough for unit tests: four scenarios on a coarse
/// sampler grid.
Json small_config_json()
{
  Json specs = Json::array();
  const char *kinds[] = {"straight", "curve", "lane-obstacle", "crossing"};
  for (int i = 0; i < 4; ++i) {
    specs.push_back(Json{{"kind", kinds[i % 4]}, {"seed", 100 + i}});
  }
  return Json{{"seed", 7},
              {"corpus", {{"specs", specs}}},
              {"sampler",
               {{"lateral_offsets", {-1.0, 0.0, 1.0}},
                {"speed_fractions", {0.0, 0.5, 1.0, 1.2}},
                {"horizons", {3.0, 4.0}}}},
              {"emit", {{"domains", {"bev", "fpv"}}}}};
}

PipelineConfig small_config(const fs::path &out, std::size_t workers = 1)
{
  PipelineConfig cfg = config_from_json(small_config_json());
  cfg.output_dir = out;
  cfg.workers = workers;
  cfg.validate();
  return cfg;
}

fs::path write_config(const fs::path &dir, const Json &doc)
{
  fs::create_directories(dir);
  const fs::path p = dir / "config.json";
  std::ofstream(p) << doc.dump(1);
  return p;
}

TEST(Config, RejectsUnknownKeys)
{
  EXPECT_THROW(config_from_json(Json{{"sede", 1}}), ConfigError);
  EXPECT_THROW(config_from_json(Json{{"sampler", {{"dtt", 0.1}}}}), ConfigError);
  EXPECT_THROW(config_from_json(Json{{"filter", {{"resolution", {1.0, 2.0}}}}}), ConfigError);
  EXPECT_THROW(config_from_json(Json{{"styles", {{"names", {"Comfort", "Comfort"}}}}}), ConfigError);
  EXPECT_NO_THROW(config_from_json(small_config_json()));
}

TEST(Config, StageHashesAreScoped)
{
  PipelineConfig a = small_config("a");
  PipelineConfig b = a;
  b.evaluate.thresholds.success_ade = 3.0;
  EXPECT_EQ(a.stage_hash("plan"), b.stage_hash("plan"));
  EXPECT_NE(a.stage_hash("evaluate"), b.stage_hash("evaluate"));
  b.output_dir = "elsewhere";
  b.workers = 4;
  EXPECT_EQ(a.stage_hash("emit"), b.stage_hash("emit"));
}

TEST(Pipeline, StagesRunInOrderAndAreDeterministic)
{
  const fs::path one = scratch_dir("pipeline_one");
  const fs::path two = scratch_dir("pipeline_two");
  run_dataset_pipeline(small_config(one, 1));
  run_dataset_pipeline(small_config(two, 3));
  const fs::path rel_data = dataset_path(small_config(one)).lexically_relative(one);
  for (const fs::path &rel : {fs::path("scenarios/manifest.json"), fs::path("instances/summary.json"),
                             fs::path("filter/report.json"), fs::path("filter/retained.json"),
                             fs::path("dataset/manifest.json"), rel_data}) {
    EXPECT_EQ(read_file(one / rel), read_file(two / rel)) << rel;
  }
  const Json manifest = Json::parse(read_file(one / "dataset/manifest.json"));
  EXPECT_GT(manifest["count"].get<int>(), 0);
}

TEST(Pipeline, GroundTruthPredictionsScorePerfectly)
{
  const fs::path out = scratch_dir("pipeline_eval");
  const PipelineConfig cfg = small_config(out);
  run_dataset_pipeline(cfg);
  const Json result = run_evaluate(cfg, dataset_path(cfg));
  ASSERT_TRUE(result["s_final"].is_number());
  // The kinematic consistency term sees the 2 Hz resampling error of the
  // ground truth itself, so only the displacement terms are exact.
  EXPECT_GT(result["s_final"].get<double>(), 0.99);
  EXPECT_EQ(result["n_generated"], result["n_total"]);
  const Json report = Json::parse(read_file(out / "eval/report.json"));
  EXPECT_EQ(report["ade"].get<double>(), 0.0);
  EXPECT_EQ(report["fde"].get<double>(), 0.0);
  EXPECT_EQ(report["psr"].get<double>(), 1.0);
  EXPECT_EQ(report["mr"].get<double>(), 0.0);

  const Json plots = run_plot(cfg);
  EXPECT_TRUE(fs::exists(out / "plots/scores.svg"));
  EXPECT_TRUE(plots.is_object());
}

TEST(Pipeline, MissingStageIsReported)
{
  const fs::path out = scratch_dir("pipeline_missing");
  const PipelineConfig cfg = small_config(out);
  EXPECT_THROW(run_plan(cfg), MissingStageError);
  EXPECT_THROW(run_emit(cfg), MissingStageError);
  EXPECT_THROW(run_plot(cfg), MissingStageError);
}

TEST(Pipeline, StaleArtifactsAreRejected)
{
  const fs::path out = scratch_dir("pipeline_stale");
  PipelineConfig cfg = small_config(out);
  run_gen(cfg);
  cfg.sampler.dt = 0.05;
  run_plan(cfg);
  PipelineConfig other = small_config(out);
  EXPECT_THROW(run_filter(other), DataError);
}

TEST(Pipeline, PlotOnEmptyReport)
{
  const fs::path out = scratch_dir("pipeline_plot_empty");
  const PipelineConfig cfg = small_config(out);
  fs::create_directories(out);
  std::ofstream(out / "empty_report.json") << "{}";
  PlotInputs in;
  in.eval_report = out / "empty_report.json";
  run_plot(cfg, in);
  const std::string svg = read_file(out / "plots/scores.svg");
  EXPECT_NE(svg.find("no data"), std::string::npos);
}

TEST(Cli, ExitCodes)
{
  const fs::path dir = scratch_dir("cli_codes");
  const fs::path good = write_config(dir, small_config_json());
  const fs::path bad = write_config(dir / "bad", Json{{"seed", "seven"}});
  const std::string out = (dir / "out").string();

  EXPECT_EQ(run_cli({"--config", bad.string(), "--out", out, "gen"}), 1);
  EXPECT_EQ(run_cli({"--out", out, "frobnicate"}), 1);
  EXPECT_EQ(run_cli({"--config", good.string(), "--out", out, "plan"}), 2);
  EXPECT_EQ(run_cli({"--config", good.string(), "--out", out, "gen"}), 0);
  EXPECT_EQ(run_cli({"--config", good.string(), "--out", out, "--workers", "2", "plan"}), 0);
  EXPECT_EQ(run_cli({"--config", good.string(), "--out", out, "filter"}), 0);
  EXPECT_EQ(run_cli({"--config", good.string(), "--out", out, "emit"}), 0);
  EXPECT_EQ(run_cli({"--config", good.string(), "--out", out, "evaluate", "--predictions",
                     (dir / "nope.json").string()}),
            2);
  // A different seed invalidates the emitted artifacts.
  EXPECT_EQ(run_cli({"--config", good.string(), "--out", out, "--seed", "8", "filter"}), 2);
}

}  // namespace
}  // namespace drivestyle
