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
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "drivestyle/common.hpp"
#include "drivestyle/corpus_properties.hpp"
#include "drivestyle/instruction.hpp"
#include "drivestyle/json_util.hpp"
#include "drivestyle/loss.hpp"
#include "drivestyle/metrics.hpp"
#include "drivestyle/plot.hpp"
#include "drivestyle/scenario_io.hpp"
#include "drivestyle/style_cost.hpp"
#include "drivestyle/style_filter.hpp"
#include "drivestyle/synthetic.hpp"

namespace drivestyle
{

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Planning-instance serialization

inline Json instance_to_json(const PlanningInstance &inst)
{
  Json history = Json::array();
  for (const auto &s : inst.history) {
    history.push_back(Json::array({s.t, s.x, s.y, s.v, s.a, s.theta}));
  }
  Json j = Json::object();
  j["step"] = inst.step;
  j["time"] = inst.time;
  j["ego"] = state_to_json(inst.ego);
  j["history"] = std::move(history);
  j["trajectory"] = trajectory_to_json(inst.trajectory);
  return j;
}

inline PlanningInstance instance_from_json(const Json &j, const std::string &scenario_id, Style style,
                                           const std::string &path)
{
  PlanningInstance inst;
  inst.scenario_id = scenario_id;
  inst.style = style;
  const Json &step = schema::field(j, "step", path);
  if (!step.is_number_unsigned()) {
    throw SchemaError(schema::join(path, "step") + ": expected a non-negative integer");
  }
  inst.step = step.get<std::size_t>();
  inst.time = schema::number(j, "time", path);
  inst.ego = state_from_json(schema::field(j, "ego", path), schema::join(path, "ego"));
  const Json &history = schema::array(j, "history", path);
  for (std::size_t i = 0; i < history.size(); ++i) {
    const std::string p = schema::join(path, "history") + "[" + std::to_string(i) + "]";
    if (!history[i].is_array() || history[i].size() != 6) {
      throw SchemaError(p + ": expected [t, x, y, v, a, theta]");
    }
    inst.history.push_back({schema::number_at(history[i], 0, p), schema::number_at(history[i], 1, p),
                            schema::number_at(history[i], 2, p), schema::number_at(history[i], 3, p),
                            schema::number_at(history[i], 4, p), schema::number_at(history[i], 5, p)});
  }
  inst.trajectory =
    trajectory_from_json(schema::field(j, "trajectory", path), schema::join(path, "trajectory"));
  return inst;
}

// ---------------------------------------------------------------------------
// Configuration

/// Sampler grid with target speeds expressed as fractions of each
/// scenario's desired speed.
struct SamplerSettings
{
  std::vector<double> lateral_offsets = SamplerConfig::defaults(1.0).lateral_offsets;
  std::vector<double> speed_fractions = SamplerConfig::defaults(1.0).target_speeds;
  std::vector<double> horizons = SamplerConfig::defaults(1.0).horizons;
  double dt = 0.1;
  double planning_horizon = 5.0;
  FeasibilityLimits limits;
  double replan_dt = 0.5;

  SamplerConfig for_speed(double v_ref) const
  {
    SamplerConfig cfg;
    cfg.lateral_offsets = lateral_offsets;
    for (double f : speed_fractions) {
      cfg.target_speeds.push_back(f * v_ref);
    }
    cfg.horizons = horizons;
    cfg.dt = dt;
    cfg.planning_horizon = planning_horizon;
    cfg.limits = limits;
    return cfg;
  }

  void validate() const
  {
    for (double f : speed_fractions) {
      if (!(f >= 0.0)) {
        throw ConfigError("sampler.speed_fractions must be non-negative");
      }
    }
    for_speed(1.0).validate();
    if (!(replan_dt > 0.0)) {
      throw ConfigError("sampler.replan_dt must be positive");
    }
  }
};

struct EmitSettings
{
  std::vector<Domain> domains = {Domain::bev, Domain::fpv};
  std::vector<Horizon> horizons = {Horizon::standard, Horizon::extended};
  bool json_lines = false;
  /// FPV camera frames are produced outside this toolkit; samples reference
  /// them by this pattern ({scenario}, {style}, {step} are substituted).
  std::string fpv_image_pattern = "images/fpv/{scenario}__{style}__t{step}.png";
};

struct EvaluateSettings
{
  AggregationMode mode = AggregationMode::per_sample_mean;
  Thresholds thresholds;
};

/// One corpus entry: a synthetic spec, or a scenario document on disk.
struct CorpusEntry
{
  ScenarioSpec spec;
  std::string file;
};

struct PipelineConfig
{
  std::uint64_t seed = 42;
  fs::path output_dir = "out";
  std::size_t workers = 1;
  /// Empty means the default synthetic corpus for `seed`.
  std::vector<CorpusEntry> corpus;
  std::vector<StyleProfile> styles = {builtin_profiles().begin(), builtin_profiles().end()};
  SamplerSettings sampler;
  /// Feature resolution floor keeps the MCD well-posed when many instances
  /// share identical steady-cruise features.
  FilterOptions filter = with_resolution(0.05);
  EmitSettings emit;
  EvaluateSettings evaluate;

  std::vector<CorpusEntry> effective_corpus() const
  {
    if (!corpus.empty()) {
      return corpus;
    }
    std::vector<CorpusEntry> out;
    for (const auto &spec : default_corpus_specs(seed)) {
      out.push_back({spec, ""});
    }
    return out;
  }

  void validate() const
  {
    if (workers == 0) {
      throw ConfigError("workers must be at least 1");
    }
    if (styles.empty()) {
      throw ConfigError("styles.names must name at least one style");
    }
    for (const auto &p : styles) {
      p.validate();
    }
    sampler.validate();
    filter.validate();
    if (emit.domains.empty() || emit.horizons.empty()) {
      throw ConfigError("emit.domains and emit.horizons must be non-empty");
    }
    if (!(evaluate.thresholds.success_ade > 0.0 && evaluate.thresholds.miss_fde > 0.0)) {
      throw ConfigError("evaluate thresholds must be positive");
    }
  }

  /// Canonical form of every setting that influences artifact contents.
  Json canonical_json() const
  {
    Json j = Json::object();
    j["seed"] = seed;
    Json specs = Json::array();
    for (const auto &e : effective_corpus()) {
      if (e.file.empty()) {
        specs.push_back(Json{{"kind", std::string(to_string(e.spec.kind))}, {"seed", e.spec.seed}});
      } else {
        specs.push_back(Json{{"file", e.file}});
      }
    }
    j["corpus"] = Json{{"specs", std::move(specs)}};
    Json names = Json::array();
    Json weights = Json::object();
    for (const auto &p : styles) {
      names.push_back(p.name());
      weights[p.name()] = profile_to_json(p);
    }
    j["styles"] = Json{{"names", std::move(names)}, {"weights", std::move(weights)}};
    j["sampler"] = Json{{"lateral_offsets", sampler.lateral_offsets},
                        {"speed_fractions", sampler.speed_fractions},
                        {"horizons", sampler.horizons},
                        {"dt", sampler.dt},
                        {"planning_horizon", sampler.planning_horizon},
                        {"replan_dt", sampler.replan_dt},
                        {"limits", Json{{"a_max", sampler.limits.a_max},
                                        {"kappa_max", sampler.limits.kappa_max},
                                        {"yaw_rate_max", sampler.limits.yaw_rate_max},
                                        {"v_max", sampler.limits.v_max}}}};
    const auto res = filter.resolution.vector();
    j["filter"] = Json{{"support_fraction", filter.support_fraction},
                       {"threshold", filter.threshold},
                       {"resolution", std::vector<double>(res.data(), res.data() + res.size())}};
    Json domains = Json::array();
    for (Domain d : emit.domains) {
      domains.push_back(std::string(to_string(d)));
    }
    Json horizons = Json::array();
    for (Horizon h : emit.horizons) {
      horizons.push_back(static_cast<int>(h));
    }
    j["emit"] = Json{{"domains", std::move(domains)},
                     {"horizons", std::move(horizons)},
                     {"json_lines", emit.json_lines},
                     {"fpv_image_pattern", emit.fpv_image_pattern}};
    j["evaluate"] = Json{{"mode", to_string(evaluate.mode)},
                         {"success_ade", evaluate.thresholds.success_ade},
                         {"miss_fde", evaluate.thresholds.miss_fde}};
    return j;
  }

  /// Provenance hash; output location and worker count do not enter it.
  std::string hash() const { return hex64(fnv1a(canonical_json().dump())); }

  /// Hash of the settings that the named stage and its upstream stages
  /// depend on (gen, plan, filter, emit, evaluate).
  std::string stage_hash(const std::string &stage) const
  {
    static const std::vector<std::pair<std::string, std::vector<std::string>>> scopes = {
      {"gen", {"seed", "corpus"}},
      {"plan", {"styles", "sampler"}},
      {"filter", {"filter"}},
      {"emit", {"emit"}},
      {"evaluate", {"evaluate"}}};
    const Json full = canonical_json();
    Json subset = Json::object();
    for (const auto &[name, keys] : scopes) {
      for (const auto &k : keys) {
        subset[k] = full.at(k);
      }
      if (name == stage) {
        return hex64(fnv1a(subset.dump()));
      }
    }
    throw std::logic_error("unknown stage " + stage);
  }
};

namespace config_detail
{

inline void reject_unknown(const Json &obj, const std::vector<std::string> &allowed,
                           const std::string &path)
{
  if (!obj.is_object()) {
    throw ConfigError((path.empty() ? "config" : path) + ": expected an object");
  }
  for (const auto &[key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError((path.empty() ? "" : path + ".") + key + ": unknown setting");
    }
  }
}

inline double number(const Json &obj, const std::string &key, const std::string &path)
{
  const Json &v = obj.at(key);
  if (!v.is_number()) {
    throw ConfigError(path + "." + key + ": expected a number");
  }
  return v.get<double>();
}

inline std::uint64_t unsigned_integer(const Json &v, const std::string &path)
{
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw ConfigError(path + ": expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

inline std::vector<double> numbers(const Json &obj, const std::string &key, const std::string &path)
{
  const Json &v = obj.at(key);
  if (!v.is_array()) {
    throw ConfigError(path + "." + key + ": expected an array of numbers");
  }
  std::vector<double> out;
  for (const auto &x : v) {
    if (!x.is_number()) {
      throw ConfigError(path + "." + key + ": expected an array of numbers");
    }
    out.push_back(x.get<double>());
  }
  return out;
}

template <typename Fn>
auto wrap(const std::string &path, Fn &&fn)
{
  try {
    return fn();
  } catch (const ConfigError &) {
    throw;
  } catch (const std::exception &e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace config_detail

/// Builds a configuration from a JSON document. Relative scenario file paths
/// resolve against `base_dir`. Unknown keys are rejected.
inline PipelineConfig config_from_json(const Json &doc, const fs::path &base_dir = {})
{
  using namespace config_detail;
  PipelineConfig cfg;
  reject_unknown(doc, {"seed", "output_dir", "workers", "corpus", "styles", "sampler", "filter",
                       "emit", "evaluate"},
                 "");
  if (doc.contains("seed")) {
    cfg.seed = unsigned_integer(doc["seed"], "seed");
  }
  if (doc.contains("output_dir")) {
    if (!doc["output_dir"].is_string()) {
      throw ConfigError("output_dir: expected a string");
    }
    cfg.output_dir = doc["output_dir"].get<std::string>();
  }
  if (doc.contains("workers")) {
    cfg.workers = static_cast<std::size_t>(unsigned_integer(doc["workers"], "workers"));
  }
  if (doc.contains("corpus")) {
    const Json &corpus = doc["corpus"];
    reject_unknown(corpus, {"specs"}, "corpus");
    if (corpus.contains("specs")) {
      if (!corpus["specs"].is_array()) {
        throw ConfigError("corpus.specs: expected an array");
      }
      for (std::size_t i = 0; i < corpus["specs"].size(); ++i) {
        const Json &e = corpus["specs"][i];
        const std::string p = "corpus.specs[" + std::to_string(i) + "]";
        if (!e.is_object()) {
          throw ConfigError(p + ": expected an object");
        }
        CorpusEntry entry;
        if (e.contains("file")) {
          reject_unknown(e, {"file"}, p);
          if (!e["file"].is_string()) {
            throw ConfigError(p + ".file: expected a string");
          }
          fs::path file = e["file"].get<std::string>();
          if (file.is_relative() && !base_dir.empty()) {
            file = base_dir / file;
          }
          entry.file = file.lexically_normal().string();
        } else {
          reject_unknown(e, {"kind", "seed"}, p);
          if (!e.contains("kind") || !e["kind"].is_string()) {
            throw ConfigError(p + ".kind: expected a scenario kind string");
          }
          entry.spec.kind =
            wrap(p, [&] { return scenario_kind_from_string(e["kind"].get<std::string>()); });
          entry.spec.seed = e.contains("seed") ? unsigned_integer(e["seed"], p + ".seed") : cfg.seed;
        }
        cfg.corpus.push_back(entry);
      }
    }
  }
  if (doc.contains("styles")) {
    const Json &styles = doc["styles"];
    reject_unknown(styles, {"names", "weights"}, "styles");
    std::vector<StyleProfile> all(builtin_profiles().begin(), builtin_profiles().end());
    if (styles.contains("weights")) {
      for (const auto &p : wrap("styles.weights", [&] { return profiles_from_json(styles["weights"]); })) {
        all[static_cast<std::size_t>(p.style)] = p;
      }
    }
    std::vector<StyleProfile> chosen = all;
    if (styles.contains("names")) {
      if (!styles["names"].is_array()) {
        throw ConfigError("styles.names: expected an array of style names");
      }
      chosen.clear();
      for (const auto &n : styles["names"]) {
        if (!n.is_string()) {
          throw ConfigError("styles.names: expected an array of style names");
        }
        const Style st = wrap("styles.names", [&] { return style_from_string(n.get<std::string>()); });
        if (std::any_of(chosen.begin(), chosen.end(), [&](const auto &p) { return p.style == st; })) {
          throw ConfigError("styles.names: duplicate style " + n.get<std::string>());
        }
        chosen.push_back(all[static_cast<std::size_t>(st)]);
      }
      std::sort(chosen.begin(), chosen.end(),
                [](const auto &a, const auto &b) { return a.style < b.style; });
    }
    cfg.styles = chosen;
  }
  if (doc.contains("sampler")) {
    const Json &s = doc["sampler"];
    reject_unknown(s, {"lateral_offsets", "speed_fractions", "horizons", "dt", "planning_horizon",
                       "replan_dt", "limits"},
                   "sampler");
    if (s.contains("lateral_offsets")) cfg.sampler.lateral_offsets = numbers(s, "lateral_offsets", "sampler");
    if (s.contains("speed_fractions")) cfg.sampler.speed_fractions = numbers(s, "speed_fractions", "sampler");
    if (s.contains("horizons")) cfg.sampler.horizons = numbers(s, "horizons", "sampler");
    if (s.contains("dt")) cfg.sampler.dt = number(s, "dt", "sampler");
    if (s.contains("planning_horizon")) cfg.sampler.planning_horizon = number(s, "planning_horizon", "sampler");
    if (s.contains("replan_dt")) cfg.sampler.replan_dt = number(s, "replan_dt", "sampler");
    if (s.contains("limits")) {
      const Json &l = s["limits"];
      reject_unknown(l, {"a_max", "kappa_max", "yaw_rate_max", "v_max"}, "sampler.limits");
      if (l.contains("a_max")) cfg.sampler.limits.a_max = number(l, "a_max", "sampler.limits");
      if (l.contains("kappa_max")) cfg.sampler.limits.kappa_max = number(l, "kappa_max", "sampler.limits");
      if (l.contains("yaw_rate_max")) cfg.sampler.limits.yaw_rate_max = number(l, "yaw_rate_max", "sampler.limits");
      if (l.contains("v_max")) cfg.sampler.limits.v_max = number(l, "v_max", "sampler.limits");
    }
  }
  if (doc.contains("filter")) {
    const Json &f = doc["filter"];
    reject_unknown(f, {"support_fraction", "threshold", "resolution"}, "filter");
    if (f.contains("support_fraction")) cfg.filter.support_fraction = number(f, "support_fraction", "filter");
    if (f.contains("threshold")) cfg.filter.threshold = number(f, "threshold", "filter");
    if (f.contains("resolution")) {
      const auto r = numbers(f, "resolution", "filter");
      if (r.size() != 6) {
        throw ConfigError("filter.resolution: expected 6 numbers (" + std::string(kFeatureNames[0]) +
                          " ... " + kFeatureNames[5] + ")");
      }
      cfg.filter.resolution = {r[0], r[1], r[2], r[3], r[4], r[5]};
    }
  }
  if (doc.contains("emit")) {
    const Json &e = doc["emit"];
    reject_unknown(e, {"domains", "horizons", "json_lines", "fpv_image_pattern"}, "emit");
    if (e.contains("domains")) {
      if (!e["domains"].is_array()) {
        throw ConfigError("emit.domains: expected an array");
      }
      cfg.emit.domains.clear();
      for (const auto &d : e["domains"]) {
        if (!d.is_string()) {
          throw ConfigError("emit.domains: expected domain names");
        }
        cfg.emit.domains.push_back(domain_from_string(d.get<std::string>()));
      }
    }
    if (e.contains("horizons")) {
      cfg.emit.horizons.clear();
      for (double h : numbers(e, "horizons", "emit")) {
        cfg.emit.horizons.push_back(horizon_from_seconds(h));
      }
    }
    if (e.contains("json_lines")) {
      if (!e["json_lines"].is_boolean()) {
        throw ConfigError("emit.json_lines: expected a boolean");
      }
      cfg.emit.json_lines = e["json_lines"].get<bool>();
    }
    if (e.contains("fpv_image_pattern")) {
      if (!e["fpv_image_pattern"].is_string() || e["fpv_image_pattern"].get<std::string>().empty()) {
        throw ConfigError("emit.fpv_image_pattern: expected a non-empty string");
      }
      cfg.emit.fpv_image_pattern = e["fpv_image_pattern"].get<std::string>();
    }
  }
  if (doc.contains("evaluate")) {
    const Json &e = doc["evaluate"];
    reject_unknown(e, {"mode", "success_ade", "miss_fde"}, "evaluate");
    if (e.contains("mode")) {
      if (!e["mode"].is_string()) {
        throw ConfigError("evaluate.mode: expected a string");
      }
      cfg.evaluate.mode = aggregation_mode_from_string(e["mode"].get<std::string>());
    }
    if (e.contains("success_ade")) cfg.evaluate.thresholds.success_ade = number(e, "success_ade", "evaluate");
    if (e.contains("miss_fde")) cfg.evaluate.thresholds.miss_fde = number(e, "miss_fde", "evaluate");
  }
  cfg.validate();
  return cfg;
}

inline PipelineConfig load_config(const fs::path &path)
{
  std::string text;
  try {
    text = read_file(path);
  } catch (const IoError &e) {
    throw ConfigError(e.what());
  }
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error &e) {
    throw ConfigError(path.string() + ": invalid JSON (" + e.what() + ")");
  }
  return config_from_json(doc, path.parent_path());
}

// ---------------------------------------------------------------------------
// Stage plumbing

/// Fixed output layout below the output directory.
struct Layout
{
  fs::path root;

  fs::path scenarios() const { return root / "scenarios"; }
  fs::path scenario_manifest() const { return scenarios() / "manifest.json"; }
  fs::path instances() const { return root / "instances"; }
  fs::path plan_summary() const { return instances() / "summary.json"; }
  fs::path filter() const { return root / "filter"; }
  fs::path filter_report() const { return filter() / "report.json"; }
  fs::path retained() const { return filter() / "retained.json"; }
  fs::path dataset() const { return root / "dataset"; }
  fs::path dataset_manifest() const { return dataset() / "manifest.json"; }
  fs::path eval() const { return root / "eval"; }
  fs::path eval_report() const { return eval() / "report.json"; }
  fs::path eval_csv() const { return eval() / "report.csv"; }
  fs::path eval_losses() const { return eval() / "losses.json"; }
  fs::path plots() const { return root / "plots"; }
};

/// Raised when a stage's input artifacts are absent.
class MissingStageError : public DataError
{
public:
  using DataError::DataError;
};

namespace pipeline_detail
{

inline Json provenance(const PipelineConfig &cfg, const std::string &stage)
{
  return Json{{"config_hash", cfg.hash()},
              {"stage_hash", cfg.stage_hash(stage)},
              {"seed", cfg.seed},
              {"stage", stage}};
}

inline std::string metadata(const PipelineConfig &cfg)
{
  return "config_hash=" + cfg.hash() + " seed=" + std::to_string(cfg.seed);
}

inline void write_json(const fs::path &path, const Json &doc, int indent = 1)
{
  write_file(path, doc.dump(indent) + "\n");
}

inline Json read_stage_json(const fs::path &path, const std::string &stage)
{
  if (!fs::exists(path)) {
    throw MissingStageError("missing " + path.string() + ": run the '" + stage +
                            "' stage first (same --out directory)");
  }
  return parse_json(read_file(path), path.string());
}

/// Guards against consuming artifacts produced under settings that differ
/// from the current ones in anything the producing stage depends on.
inline void check_provenance(const Json &doc, const PipelineConfig &cfg, const fs::path &path,
                             const std::string &stage)
{
  const std::string hash = cfg.stage_hash(stage);
  if (!doc.contains("provenance") || !doc["provenance"].is_object() ||
      doc["provenance"].value("stage_hash", "") != hash) {
    throw DataError(path.string() + " was produced under different settings; rerun '" + stage +
                    "' with the current config");
  }
}

/// Runs fn(i) for i in [0, n) on up to `workers` threads. The first
/// exception in index order is rethrown after all workers finish.
inline void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)> &fn)
{
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(std::max<std::size_t>(1, workers), std::max<std::size_t>(1, n));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back(work);
    }
    for (auto &th : pool) {
      th.join();
    }
  }
  for (auto &e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
}

inline void reset_dir(const fs::path &dir)
{
  std::error_code ec;
  fs::remove_all(dir, ec);
  fs::create_directories(dir);
}

inline std::string stream_name(const std::string &scenario_id, Style style)
{
  return scenario_id + "__" + std::string(to_string(style)) + ".json";
}

inline std::string substitute(std::string pattern, const std::string &key, const std::string &value)
{
  for (std::size_t pos = pattern.find(key); pos != std::string::npos;
       pos = pattern.find(key, pos + value.size())) {
    pattern.replace(pos, key.size(), value);
  }
  return pattern;
}

inline std::string fpv_image_ref(const PipelineConfig &cfg, const PlanningInstance &inst)
{
  char step[16];
  std::snprintf(step, sizeof step, "%03zu", inst.step);
  std::string ref = substitute(cfg.emit.fpv_image_pattern, "{scenario}", inst.scenario_id);
  ref = substitute(ref, "{style}", std::string(to_string(inst.style)));
  return substitute(ref, "{step}", step);
}

/// Inserts a provenance <metadata> element after the opening <svg> tag.
inline std::string stamp_svg(const std::string &svg, const std::string &meta)
{
  const std::size_t pos = svg.find('\n');
  return svg.substr(0, pos + 1) + "<metadata>" + meta + "</metadata>\n" + svg.substr(pos + 1);
}

inline std::vector<Scenario> load_corpus(const Layout &layout, const PipelineConfig &cfg,
                                         Json *manifest_out = nullptr)
{
  const Json manifest = read_stage_json(layout.scenario_manifest(), "gen");
  check_provenance(manifest, cfg, layout.scenario_manifest(), "gen");
  std::vector<Scenario> out;
  for (const auto &entry : manifest.at("scenarios")) {
    const fs::path p = layout.scenarios() / entry.at("file").get<std::string>();
    out.push_back(scenario_from_json(parse_json(read_file(p), p.string())));
  }
  if (manifest_out) {
    *manifest_out = manifest;
  }
  return out;
}

struct Stream
{
  std::string scenario_id;
  Style style = Style::Default;
  std::vector<PlanningInstance> instances;
};

inline std::vector<Stream> load_streams(const Layout &layout, const PipelineConfig &cfg)
{
  const Json summary = read_stage_json(layout.plan_summary(), "plan");
  check_provenance(summary, cfg, layout.plan_summary(), "plan");
  std::vector<Stream> out;
  for (const auto &s : summary.at("streams")) {
    Stream st;
    st.scenario_id = s.at("scenario_id").get<std::string>();
    st.style = style_from_string(s.at("style").get<std::string>());
    const fs::path p = layout.instances() / s.at("file").get<std::string>();
    const Json doc = parse_json(read_file(p), p.string());
    const Json &arr = schema::array(doc, "instances", p.string());
    for (std::size_t i = 0; i < arr.size(); ++i) {
      st.instances.push_back(instance_from_json(arr[i], st.scenario_id, st.style,
                                                p.string() + ":instances[" + std::to_string(i) + "]"));
    }
    out.push_back(std::move(st));
  }
  return out;
}

}  // namespace pipeline_detail

// ---------------------------------------------------------------------------
// Stages. Each returns a short JSON summary and reads only on-disk artifacts
// of earlier stages.

inline Scenario materialize(const CorpusEntry &entry)
{
  if (!entry.file.empty()) {
    try {
      return scenario_from_json(parse_json(read_file(entry.file), entry.file));
    } catch (const DataError &e) {
      throw DataError("corpus entry " + entry.file + ": " + e.what());
    }
  }
  return generate_synthetic_scenario(entry.spec.kind, entry.spec.seed);
}

inline Json run_gen(const PipelineConfig &cfg, std::ostream *log = nullptr)
{
  using namespace pipeline_detail;
  const Layout layout{cfg.output_dir};
  const auto corpus = cfg.effective_corpus();
  std::vector<Scenario> scenarios(corpus.size());
  parallel_for(corpus.size(), cfg.workers, [&](std::size_t i) { scenarios[i] = materialize(corpus[i]); });
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (scenarios[i].id == scenarios[j].id) {
        throw DataError("corpus entries " + std::to_string(j) + " and " + std::to_string(i) +
                        " share the scenario id " + scenarios[i].id);
      }
    }
  }
  reset_dir(layout.scenarios());
  Json list = Json::array();
  std::map<std::string, std::size_t> kinds;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    Json doc = scenario_to_json(scenarios[i]);
    doc["provenance"] = provenance(cfg, "gen");
    const std::string file = scenarios[i].id + ".json";
    write_json(layout.scenarios() / file, doc);
    const std::string kind = corpus[i].file.empty() ? std::string(to_string(corpus[i].spec.kind)) : "file";
    ++kinds[kind];
    Json e{{"id", scenarios[i].id}, {"file", file}, {"kind", kind}};
    if (corpus[i].file.empty()) {
      e["seed"] = corpus[i].spec.seed;
    } else {
      e["source"] = corpus[i].file;
    }
    list.push_back(std::move(e));
  }
  Json per_kind = Json::object();
  for (const auto &[k, n] : kinds) {
    per_kind[k] = n;
  }
  Json manifest{{"provenance", provenance(cfg, "gen")},
                {"count", scenarios.size()},
                {"per_kind", per_kind},
                {"scenarios", list}};
  write_json(layout.scenario_manifest(), manifest);
  if (log) {
    *log << "gen: " << scenarios.size() << " scenarios -> " << layout.scenarios().string() << "\n";
  }
  return Json{{"stage", "gen"}, {"scenarios", scenarios.size()}};
}

inline Json run_plan(const PipelineConfig &cfg, std::ostream *log = nullptr)
{
  using namespace pipeline_detail;
  const Layout layout{cfg.output_dir};
  const std::vector<Scenario> scenarios = load_corpus(layout, cfg);

  struct Job
  {
    std::size_t scenario = 0;
    const StyleProfile *profile = nullptr;
    std::size_t count = 0;
    std::optional<Json> failure;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    for (const auto &p : cfg.styles) {
      jobs.push_back({i, &p, 0, std::nullopt});
    }
  }
  reset_dir(layout.instances());
  const Json prov = provenance(cfg, "plan");
  std::mutex log_mutex;
  parallel_for(jobs.size(), cfg.workers, [&](std::size_t k) {
    Job &job = jobs[k];
    const Scenario &sc = scenarios[job.scenario];
    PlanOptions opts;
    opts.replan_dt = cfg.sampler.replan_dt;
    opts.sampler = cfg.sampler.for_speed(sc.desired_speed());
    try {
      const auto insts = plan_scenario(sc, *job.profile, opts);
      Json arr = Json::array();
      for (const auto &inst : insts) {
        arr.push_back(instance_to_json(inst));
      }
      Json doc{{"provenance", prov},
               {"scenario_id", sc.id},
               {"style", job.profile->name()},
               {"count", insts.size()},
               {"instances", std::move(arr)}};
      write_file(layout.instances() / stream_name(sc.id, job.profile->style), doc.dump() + "\n");
      job.count = insts.size();
    } catch (const PlannerFailure &e) {
      Json counts = Json::object();
      for (std::size_t r = 0; r < 4; ++r) {
        counts[std::string(kInfeasibilityNames[r])] = e.infeasible_counts()[r];
      }
      job.failure = Json{{"scenario_id", sc.id},
                         {"style", job.profile->name()},
                         {"message", e.what()},
                         {"infeasible", counts}};
      if (log) {
        std::lock_guard lock(log_mutex);
        *log << "plan: failure: " << e.what() << "\n";
      }
    }
  });

  Json streams = Json::array();
  Json failures = Json::array();
  std::map<Style, std::pair<std::size_t, std::size_t>> per_style;
  for (const auto &p : cfg.styles) {
    per_style[p.style] = {0, 0};
  }
  std::size_t total = 0;
  for (const auto &job : jobs) {
    const Scenario &sc = scenarios[job.scenario];
    if (job.failure) {
      failures.push_back(*job.failure);
      continue;
    }
    streams.push_back(Json{{"scenario_id", sc.id},
                           {"style", job.profile->name()},
                           {"file", stream_name(sc.id, job.profile->style)},
                           {"count", job.count}});
    per_style[job.profile->style].first += 1;
    per_style[job.profile->style].second += job.count;
    total += job.count;
  }
  Json styles = Json::object();
  for (const auto &[st, c] : per_style) {
    styles[std::string(to_string(st))] = Json{{"streams", c.first}, {"instances", c.second}};
  }
  Json summary{{"provenance", prov},
               {"replan_dt", cfg.sampler.replan_dt},
               {"instances", total},
               {"per_style", styles},
               {"streams", streams},
               {"failures", failures}};
  write_json(layout.plan_summary(), summary);
  if (log) {
    *log << "plan: " << streams.size() << " streams, " << total << " instances, "
         << failures.size() << " failures\n";
  }
  return Json{{"stage", "plan"}, {"instances", total}, {"failures", failures.size()}};
}

inline Json run_filter(const PipelineConfig &cfg, std::ostream *log = nullptr)
{
  using namespace pipeline_detail;
  const Layout layout{cfg.output_dir};
  const auto streams = load_streams(layout, cfg);
  struct Ref
  {
    std::size_t stream = 0;
    std::size_t index = 0;
  };
  std::vector<Ref> refs;
  std::vector<std::pair<Style, const Trajectory *>> items;
  for (std::size_t s = 0; s < streams.size(); ++s) {
    for (std::size_t i = 0; i < streams[s].instances.size(); ++i) {
      refs.push_back({s, i});
      items.emplace_back(streams[s].style, &streams[s].instances[i].trajectory);
    }
  }
  const FilterResult result = filter_instances(items, cfg.seed, cfg.filter);

  Json retained = Json::array();
  std::vector<std::pair<Style, const Trajectory *>> kept;
  for (std::size_t idx : result.retained) {
    const auto &st = streams[refs[idx].stream];
    const auto &inst = st.instances[refs[idx].index];
    retained.push_back(Json{{"scenario_id", st.scenario_id},
                            {"style", std::string(to_string(st.style))},
                            {"step", inst.step},
                            {"score", result.scores[idx]}});
    kept.push_back(items[idx]);
  }
  const CorpusSummary corpus = summarize_corpus(kept);
  std::vector<OrderingVerdict> orderings;
  if (corpus.styles.size() == kAllStyles.size()) {
    orderings = check_style_orderings(corpus.styles);
  }
  const Json prov = provenance(cfg, "filter");
  reset_dir(layout.filter());
  write_json(layout.retained(), Json{{"provenance", prov},
                                     {"threshold", cfg.filter.threshold},
                                     {"count", result.retained.size()},
                                     {"retained", retained}});
  Json report{{"provenance", prov},
              {"threshold", cfg.filter.threshold},
              {"support_fraction", cfg.filter.support_fraction},
              {"input_count", items.size()},
              {"retained_count", result.retained.size()},
              {"styles", filter_report_to_json(result)},
              {"corpus", corpus_summary_to_json(corpus, orderings)}};
  write_json(layout.filter_report(), report);
  if (log) {
    *log << "filter: retained " << result.retained.size() << " of " << items.size() << "\n";
    for (const auto &w : corpus.warnings) {
      *log << "filter: warning: " << w << "\n";
    }
    for (const auto &rep : result.styles) {
      if (rep.warning) {
        *log << "filter: warning: " << to_string(rep.style) << ": " << *rep.warning << "\n";
      }
    }
  }
  return Json{{"stage", "filter"}, {"input", items.size()}, {"retained", result.retained.size()}};
}

inline Json run_emit(const PipelineConfig &cfg, std::ostream *log = nullptr)
{
  using namespace pipeline_detail;
  const Layout layout{cfg.output_dir};
  const Json retained = read_stage_json(layout.retained(), "filter");
  check_provenance(retained, cfg, layout.retained(), "filter");
  const std::vector<Scenario> scenarios = load_corpus(layout, cfg);
  const auto streams = load_streams(layout, cfg);

  std::map<std::string, const Scenario *> by_id;
  for (const auto &sc : scenarios) {
    by_id[sc.id] = &sc;
  }
  std::map<std::pair<std::string, Style>, const Stream *> stream_of;
  for (const auto &st : streams) {
    stream_of[{st.scenario_id, st.style}] = &st;
  }
  std::vector<const PlanningInstance *> chosen;
  for (const auto &r : retained.at("retained")) {
    const std::string id = r.at("scenario_id").get<std::string>();
    const Style style = style_from_string(r.at("style").get<std::string>());
    const std::size_t step = r.at("step").get<std::size_t>();
    const auto it = stream_of.find({id, style});
    if (it == stream_of.end() || step >= it->second->instances.size() ||
        it->second->instances[step].step != step || !by_id.count(id)) {
      throw DataError("retained instance " + id + "/" + std::string(to_string(style)) + "/" +
                      std::to_string(step) + " has no matching plan output");
    }
    chosen.push_back(&it->second->instances[step]);
  }

  const bool bev = std::find(cfg.emit.domains.begin(), cfg.emit.domains.end(), Domain::bev) !=
                   cfg.emit.domains.end();
  const std::size_t per_inst = cfg.emit.domains.size() * cfg.emit.horizons.size();
  std::vector<VqaSample> samples(chosen.size() * per_inst);
  reset_dir(layout.dataset());
  const std::string meta = metadata(cfg);
  parallel_for(chosen.size(), cfg.workers, [&](std::size_t i) {
    const PlanningInstance &inst = *chosen[i];
    const Scenario &sc = *by_id.at(inst.scenario_id);
    std::size_t k = i * per_inst;
    for (Domain d : cfg.emit.domains) {
      for (Horizon h : cfg.emit.horizons) {
        samples[k++] = d == Domain::bev ? build_bev_sample(inst, sc, h)
                                        : build_fpv_sample(inst, sc, fpv_image_ref(cfg, inst), h);
      }
    }
    if (bev) {
      write_file(layout.dataset() / bev_image_ref(inst), stamp_svg(render_bev(sc, inst.ego), meta));
    }
  });

  const std::string hash = cfg.hash();
  std::string text = cfg.emit.json_lines ? "" : "[";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    Json rec = sample_to_json(samples[i]);
    rec["config_hash"] = hash;
    rec["seed"] = cfg.seed;
    if (cfg.emit.json_lines) {
      text += rec.dump() + "\n";
    } else {
      text += (i ? ",\n" : "\n") + rec.dump();
    }
  }
  if (!cfg.emit.json_lines) {
    text += samples.empty() ? "]\n" : "\n]\n";
  }
  const std::string file = cfg.emit.json_lines ? "dataset.jsonl" : "dataset.json";
  write_file(layout.dataset() / file, text);

  Json manifest = dataset_manifest(samples);
  manifest["provenance"] = provenance(cfg, "emit");
  manifest["file"] = file;
  manifest["instances"] = chosen.size();
  manifest["bev_images"] = bev ? chosen.size() : 0;
  manifest["fpv_image_pattern"] = cfg.emit.fpv_image_pattern;
  write_json(layout.dataset_manifest(), manifest);
  if (log) {
    *log << "emit: " << samples.size() << " samples from " << chosen.size() << " instances -> "
         << (layout.dataset() / file).string() << "\n";
  }
  return Json{{"stage", "emit"}, {"samples", samples.size()}};
}

/// Dataset file named by the emit manifest.
inline fs::path dataset_path(const PipelineConfig &cfg)
{
  using namespace pipeline_detail;
  const Layout layout{cfg.output_dir};
  const Json manifest = read_stage_json(layout.dataset_manifest(), "emit");
  check_provenance(manifest, cfg, layout.dataset_manifest(), "emit");
  return layout.dataset() / manifest.at("file").get<std::string>();
}

/// Predictions keyed by sample id. Accepts dataset records (the gpt turn is
/// the prediction) or {"id", "response"} records, as a JSON array or JSON
/// lines; a response is a trajectory document or its JSON text.
inline std::map<std::string, Json> load_predictions(const fs::path &path)
{
  const std::string text = read_file(path);
  std::vector<Json> records;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    const Json doc = parse_json(text, path.string());
    records.assign(doc.begin(), doc.end());
  } else {
    std::size_t pos = 0, line = 0;
    while (pos < text.size()) {
      const std::size_t end = std::min(text.find('\n', pos), text.size());
      const std::string row = text.substr(pos, end - pos);
      ++line;
      if (row.find_first_not_of(" \t\r") != std::string::npos) {
        records.push_back(parse_json(row, path.string() + " line " + std::to_string(line)));
      }
      pos = end + 1;
    }
  }
  std::map<std::string, Json> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const Json &r = records[i];
    const std::string p = path.string() + "[" + std::to_string(i) + "]";
    const std::string id = schema::string(r, "id", p);
    Json response;
    if (r.contains("response")) {
      response = r["response"];
    } else if (r.contains("conversations")) {
      for (const auto &turn : r["conversations"]) {
        if (turn.value("from", "") == "gpt") {
          response = turn.value("value", "");
        }
      }
    }
    if (response.is_null()) {
      throw SchemaError(p + ": expected a 'response' field or a gpt turn");
    }
    if (!out.emplace(id, std::move(response)).second) {
      throw SchemaError(p + ": duplicate prediction for " + id);
    }
  }
  return out;
}

inline std::optional<PredictedSequence> parse_prediction(const Json &response)
{
  try {
    PredictedSequence seq =
      response.is_string() ? parse_response(response.get<std::string>()) : parse_response(response);
    seq.validate();
    return seq;
  } catch (const DataError &) {
    return std::nullopt;
  }
}

inline Json run_evaluate(const PipelineConfig &cfg, const fs::path &predictions_path,
                         std::ostream *log = nullptr)
{
  using namespace pipeline_detail;
  const Layout layout{cfg.output_dir};
  const fs::path data = dataset_path(cfg);
  const auto samples = parse_dataset(read_file(data));
  if (!fs::exists(predictions_path)) {
    throw IoError("predictions file " + predictions_path.string() + " does not exist");
  }
  const auto predictions = load_predictions(predictions_path);

  std::vector<EvalPair> pairs;
  std::size_t unparsable = 0, mismatched = 0;
  std::vector<std::string> known;
  for (const auto &s : samples) {
    known.push_back(s.id);
    EvalPair p;
    p.id = s.id;
    p.style = std::string(to_string(s.style));
    p.gt = parse_response(s.conversations[1].value);
    const auto it = predictions.find(s.id);
    if (it != predictions.end()) {
      p.pred = parse_prediction(it->second);
      if (!p.pred) {
        ++unparsable;
      } else if (p.pred->size() != p.gt.size()) {
        p.pred.reset();
        ++mismatched;
      }
    }
    pairs.push_back(std::move(p));
  }
  std::sort(known.begin(), known.end());
  std::size_t unknown = 0;
  for (const auto &[id, r] : predictions) {
    if (!std::binary_search(known.begin(), known.end(), id)) {
      ++unknown;
    }
  }
  const MetricsReport report = build_report(pairs, cfg.evaluate.mode, cfg.evaluate.thresholds);

  // Regression-side losses of generated samples, per style.
  std::map<std::string, std::array<double, 4>> loss_sums;  // reg, pikc, reg_total, count
  const LossConfig loss_cfg;
  for (const auto &p : pairs) {
    if (!p.pred) {
      continue;
    }
    const double reg = reg_loss(*p.pred, p.gt, loss_cfg.reg_channel_weights).value;
    const double pikc = p.pred->kinematic ? pikc_loss(*p.pred).value : 0.0;
    for (const std::string &key : {p.style, std::string("overall")}) {
      auto &acc = loss_sums[key];
      acc[0] += reg;
      acc[1] += pikc;
      acc[2] += reg + loss_cfg.w_pikc * pikc;
      acc[3] += 1.0;
    }
  }
  Json losses = Json::object();
  for (const auto &[key, acc] : loss_sums) {
    losses[key] = Json{{"n", static_cast<std::size_t>(acc[3])},
                       {"reg", acc[0] / acc[3]},
                       {"pikc", acc[1] / acc[3]},
                       {"reg_total", acc[2] / acc[3]}};
  }

  const Json prov = provenance(cfg, "evaluate");
  const std::string pred_hash = hex64(fnv1a(read_file(predictions_path)));
  Json doc = report_to_json(report);
  doc["provenance"] = prov;
  doc["predictions_hash"] = pred_hash;
  doc["unparsable_predictions"] = unparsable;
  doc["length_mismatches"] = mismatched;
  doc["unknown_prediction_ids"] = unknown;
  fs::create_directories(layout.eval());
  write_json(layout.eval_report(), doc);
  write_file(layout.eval_csv(), "# config_hash=" + cfg.hash() + ",seed=" + std::to_string(cfg.seed) +
                                  ",predictions_hash=" + pred_hash + "\n" + report_to_csv(report));
  write_json(layout.eval_losses(), Json{{"provenance", prov},
                                        {"predictions_hash", pred_hash},
                                        {"w_pikc", loss_cfg.w_pikc},
                                        {"losses", losses}});
  if (log) {
    *log << "evaluate: " << report.overall.n_generated << "/" << report.overall.n_total
         << " generated, S_final="
         << (report.overall.s_final ? fixed(*report.overall.s_final, 4) : std::string("n/a")) << "\n";
  }
  Json out{{"stage", "evaluate"}, {"n_total", report.overall.n_total},
           {"n_generated", report.overall.n_generated}};
  out["s_final"] = report.overall.s_final ? Json(*report.overall.s_final) : Json(nullptr);
  return out;
}

struct PlotInputs
{
  std::optional<fs::path> filter_report;
  std::optional<fs::path> eval_report;
  std::optional<fs::path> losses;
};

namespace pipeline_detail
{

inline std::optional<double> json_number(const Json &j, const std::string &key)
{
  if (j.is_object() && j.contains(key) && j[key].is_number()) {
    return j[key].get<double>();
  }
  return std::nullopt;
}

}  // namespace pipeline_detail

/// Charts: per-feature style means (filter report), score bars (evaluation
/// report) and hybrid_total slices over the log-variance of the regression
/// term. Absent inputs fall back to the default locations; charts whose
/// input is still absent are skipped.
inline Json run_plot(const PipelineConfig &cfg, const PlotInputs &inputs = {},
                     std::ostream *log = nullptr)
{
  using namespace pipeline_detail;
  const Layout layout{cfg.output_dir};
  const std::string meta = metadata(cfg);
  auto resolve = [](const std::optional<fs::path> &given, const fs::path &fallback) -> std::optional<fs::path> {
    if (given) {
      if (!fs::exists(*given)) {
        throw IoError("report " + given->string() + " does not exist");
      }
      return given;
    }
    return fs::exists(fallback) ? std::optional<fs::path>(fallback) : std::nullopt;
  };
  const auto filter_path = resolve(inputs.filter_report, layout.filter_report());
  const auto eval_path = resolve(inputs.eval_report, layout.eval_report());
  const auto losses_path = resolve(inputs.losses, layout.eval_losses());
  if (!filter_path && !eval_path) {
    throw MissingStageError("no report to plot: run 'filter' or 'evaluate' first, or pass a report path");
  }
  fs::create_directories(layout.plots());
  std::vector<std::string> written;
  auto emit = [&](const std::string &name, const std::string &svg) {
    write_file(layout.plots() / name, svg);
    written.push_back(name);
  };

  if (filter_path) {
    const Json report = parse_json(read_file(*filter_path), filter_path->string());
    const Json styles = report.contains("styles") ? report["styles"] : Json::object();
    for (const char *feature : kFeatureNames) {
      std::vector<std::string> cats;
      plot::BarSeries series{"retained mean", {}};
      for (const auto &[name, rep] : styles.items()) {
        cats.push_back(name);
        const Json mf = rep.is_object() ? rep.value("mean_features", Json()) : Json();
        series.values.push_back(json_number(mf, feature));
      }
      emit(std::string("features_") + feature + ".svg",
           plot::bar_chart(std::string("Style feature means: ") + feature, cats, {series}, meta));
    }
  }

  std::optional<double> reg_level;
  if (eval_path) {
    const Json report = parse_json(read_file(*eval_path), eval_path->string());
    std::vector<std::string> cats;
    plot::BarSeries s_final{"S_final", {}}, psr{"PSR", {}}, reach{"1 - MR", {}};
    auto add = [&](const std::string &name, const Json &g) {
      cats.push_back(name);
      s_final.values.push_back(json_number(g, "s_final"));
      psr.values.push_back(json_number(g, "psr"));
      const auto mr = json_number(g, "mr");
      reach.values.push_back(mr ? std::optional<double>(1.0 - *mr) : std::nullopt);
    };
    if (report.contains("per_style") && report["per_style"].is_object()) {
      for (const auto &[name, g] : report["per_style"].items()) {
        add(name, g);
      }
    }
    if (report.contains("overall") && json_number(report["overall"], "n_generated").value_or(0.0) > 0.0) {
      add("overall", report["overall"]);
    }
    emit("scores.svg", plot::bar_chart("Composite score by style", cats, {s_final, psr, reach}, meta));
  }
  if (losses_path) {
    const Json losses = parse_json(read_file(*losses_path), losses_path->string());
    if (losses.contains("losses") && losses["losses"].contains("overall")) {
      reg_level = json_number(losses["losses"]["overall"], "reg_total");
    }
  }

  // hybrid_total(l_ce = 1, l_reg_total = observed or 1) against logvar_reg.
  const double l_reg = reg_level.value_or(1.0);
  std::vector<plot::LineSeries> slices;
  for (double logvar_ce : {-1.0, 0.0, 1.0}) {
    plot::LineSeries line{"log var (ce) = " + fixed(logvar_ce, 1), {}};
    for (int k = 0; k <= 60; ++k) {
      const double logvar_reg = -3.0 + 0.1 * k;
      line.points.emplace_back(logvar_reg, hybrid_total(1.0, l_reg, logvar_ce, logvar_reg).value);
    }
    slices.push_back(std::move(line));
  }
  emit("loss_hybrid_slices.svg",
       plot::line_chart("hybrid_total slices (L_ce = 1, L_reg_total = " + fixed(l_reg, 4) + ")",
                        "log variance of the regression term", slices, meta));
  if (log) {
    *log << "plot: " << written.size() << " charts -> " << layout.plots().string() << "\n";
  }
  return Json{{"stage", "plot"}, {"charts", written}};
}

/// gen, plan, filter and emit in sequence.
inline void run_dataset_pipeline(const PipelineConfig &cfg, std::ostream *log = nullptr)
{
  run_gen(cfg, log);
  run_plan(cfg, log);
  run_filter(cfg, log);
  run_emit(cfg, log);
}

}  // namespace drivestyle
