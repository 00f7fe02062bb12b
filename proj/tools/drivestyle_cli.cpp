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

// Command-line front end. Exit codes: 0 success, 1 usage/config error,
// 2 data error, 3 internal error.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "drivestyle/pipeline.hpp"

namespace
{

using drivestyle::PipelineConfig;

struct GlobalFlags
{
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::string out;
};

PipelineConfig resolve(const GlobalFlags &flags)
{
  PipelineConfig cfg = flags.config.empty() ? PipelineConfig{} : drivestyle::load_config(flags.config);
  if (flags.seed) {
    cfg.seed = *flags.seed;
  }
  if (flags.workers) {
    cfg.workers = *flags.workers;
  }
  if (!flags.out.empty()) {
    cfg.output_dir = flags.out;
  }
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Style-conditioned trajectory dataset toolkit"};
  app.require_subcommand(1);
  GlobalFlags flags;
  app.add_option("--config", flags.config, "pipeline configuration (JSON)")->check(CLI::ExistingFile);
  app.add_option("--seed", flags.seed, "override the configured seed");
  app.add_option("--workers", flags.workers, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", flags.out, "output directory");

  auto *gen = app.add_subcommand("gen", "generate the scenario corpus");
  auto *plan = app.add_subcommand("plan", "plan every scenario under every style");
  auto *filter = app.add_subcommand("filter", "robust style filtering of planning instances");
  auto *emit = app.add_subcommand("emit", "write the instruction dataset");
  auto *run = app.add_subcommand("run", "gen, plan, filter and emit in sequence");
  auto *evaluate = app.add_subcommand("evaluate", "score predictions against the dataset");
  std::string predictions;
  evaluate->add_option("--predictions", predictions, "predictions file (JSON array or JSON lines)")
    ->required();
  auto *plot = app.add_subcommand("plot", "render charts from reports");
  std::string filter_report, eval_report, losses;
  plot->add_option("--filter-report", filter_report, "filter report (default: <out>/filter/report.json)");
  plot->add_option("--eval-report", eval_report, "evaluation report (default: <out>/eval/report.json)");
  plot->add_option("--losses", losses, "loss summary (default: <out>/eval/losses.json)");
  for (auto *sub : {gen, plan, filter, emit, run, evaluate, plot}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 1;
  }

  try {
    const PipelineConfig cfg = resolve(flags);
    std::ostream *log = &std::cerr;
    drivestyle::Json result;
    if (gen->parsed()) {
      result = drivestyle::run_gen(cfg, log);
    } else if (plan->parsed()) {
      result = drivestyle::run_plan(cfg, log);
    } else if (filter->parsed()) {
      result = drivestyle::run_filter(cfg, log);
    } else if (emit->parsed()) {
      result = drivestyle::run_emit(cfg, log);
    } else if (run->parsed()) {
      drivestyle::run_dataset_pipeline(cfg, log);
      result = drivestyle::Json{{"stage", "run"}, {"config_hash", cfg.hash()}};
    } else if (evaluate->parsed()) {
      result = drivestyle::run_evaluate(cfg, predictions, log);
    } else if (plot->parsed()) {
      drivestyle::PlotInputs in;
      if (!filter_report.empty()) in.filter_report = filter_report;
      if (!eval_report.empty()) in.eval_report = eval_report;
      if (!losses.empty()) in.losses = losses;
      result = drivestyle::run_plot(cfg, in, log);
    }
    std::cout << result.dump() << "\n";
    return 0;
  } catch (const drivestyle::Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception &e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
