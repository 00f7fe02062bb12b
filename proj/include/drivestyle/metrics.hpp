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

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "drivestyle/common.hpp"
#include "drivestyle/json_util.hpp"
#include "drivestyle/loss.hpp"

namespace drivestyle
{

struct Displacement
{
  double ade = 0.0;
  double fde = 0.0;
};

inline Displacement displacement_metrics(const PredictedSequence &pred, const PredictedSequence &gt)
{
  if (pred.size() != gt.size()) {
    throw DomainError("prediction has " + std::to_string(pred.size()) + " states, ground truth " +
                      std::to_string(gt.size()));
  }
  if (pred.size() == 0) {
    throw DomainError("empty prediction");
  }
  Displacement d;
  for (Eigen::Index t = 0; t < pred.size(); ++t) {
    const double err = std::hypot(pred.states(t, kX) - gt.states(t, kX),
                                  pred.states(t, kY) - gt.states(t, kY));
    d.ade += err;
    d.fde = err;
  }
  d.ade /= static_cast<double>(pred.size());
  return d;
}

/// Mean Euclidean gap between each next position and the constant-
/// acceleration rollout of the previous state; empty when the sequence has
/// no kinematic channels.
inline std::optional<double> kce(const PredictedSequence &pred)
{
  if (!pred.kinematic) {
    return std::nullopt;
  }
  if (pred.size() < 2) {
    throw DomainError("KCE needs at least two states");
  }
  double sum = 0.0;
  for (Eigen::Index t = 0; t + 1 < pred.size(); ++t) {
    const auto s = pred.states.row(t);
    const Vec2 roll = kinematic_rollout(s(kX), s(kY), s(kV), s(kA), s(kTheta), pred.dt);
    sum += std::hypot(pred.states(t + 1, kX) - roll.x(), pred.states(t + 1, kY) - roll.y());
  }
  return sum / static_cast<double>(pred.size() - 1);
}

struct Thresholds
{
  /// Success when ADE is strictly below this.
  double success_ade = 1.0;
  /// Miss when FDE is strictly above this.
  double miss_fde = 2.0;
};

struct SampleMetrics
{
  double ade = 0.0;
  double fde = 0.0;
  std::optional<double> kce;
  std::optional<double> mae_v;
  std::optional<double> mae_theta;
  bool success = false;
  bool miss = false;
};

inline SampleMetrics sample_metrics(const PredictedSequence &pred, const PredictedSequence &gt,
                                    const Thresholds &thresholds = {})
{
  SampleMetrics m;
  const Displacement d = displacement_metrics(pred, gt);
  m.ade = d.ade;
  m.fde = d.fde;
  m.success = m.ade < thresholds.success_ade;
  m.miss = m.fde > thresholds.miss_fde;
  if (pred.kinematic) {
    m.kce = kce(pred);
    double ev = 0.0, eh = 0.0;
    for (Eigen::Index t = 0; t < pred.size(); ++t) {
      ev += std::abs(pred.states(t, kV) - gt.states(t, kV));
      eh += std::abs(normalize_angle(pred.states(t, kTheta) - gt.states(t, kTheta)));
    }
    m.mae_v = ev / static_cast<double>(pred.size());
    m.mae_theta = eh / static_cast<double>(pred.size());
  }
  return m;
}

/// Inputs of the composite score: rates and mean errors.
struct ScoreInputs
{
  double psr = 0.0;
  double mr = 0.0;
  double ade = 0.0;
  double fde = 0.0;
  std::optional<double> kce;
  std::optional<double> mae_v;
  std::optional<double> mae_theta;
};

struct ScoreBreakdown
{
  double s_succ = 0.0;
  double s_reach = 0.0;
  double s_acc = 0.0;
  std::optional<double> s_vel;
  std::optional<double> s_head;
  std::optional<double> s_consist;
  std::optional<double> s_kin;
  /// Empty when a kinematic input is missing.
  std::optional<double> s_final;
  /// 0.35 S_succ + 0.30 S_reach + 0.20 S_acc (always available).
  double known_part = 0.0;
};

inline ScoreBreakdown composite_score(const ScoreInputs &in)
{
  ScoreBreakdown s;
  s.s_succ = in.psr;
  s.s_reach = 1.0 - in.mr;
  // Weights are applied as integer percentages so a perfect input sums to
  // exactly 1.
  s.s_acc = (4.0 * std::exp(-in.ade / 1.5) + 6.0 * std::exp(-in.fde / 3.0)) / 10.0;
  s.known_part = (35.0 * s.s_succ + 30.0 * s.s_reach + 20.0 * s.s_acc) / 100.0;
  if (in.mae_v) {
    s.s_vel = std::max(0.0, 1.0 - *in.mae_v / 3.0);
  }
  if (in.mae_theta) {
    s.s_head = std::max(0.0, 1.0 - *in.mae_theta / 0.2);
  }
  if (in.kce) {
    s.s_consist = std::max(0.0, 1.0 - *in.kce / 0.5);
  }
  if (s.s_vel && s.s_head && s.s_consist) {
    s.s_kin = (3.0 * *s.s_vel + 3.0 * *s.s_head + 4.0 * *s.s_consist) / 10.0;
    s.s_final = (35.0 * s.s_succ + 30.0 * s.s_reach + 20.0 * s.s_acc + 15.0 * *s.s_kin) / 100.0;
  }
  return s;
}

/// S_kin implied by a reported final score and its non-kinematic inputs.
inline double implied_kinematic_score(double s_final, const ScoreInputs &in)
{
  return (s_final - composite_score(in).known_part) / 0.15;
}

enum class AggregationMode { per_sample_mean, aggregate_then_score };

inline std::string to_string(AggregationMode m)
{
  return m == AggregationMode::per_sample_mean ? "per_sample_mean" : "aggregate_then_score";
}

inline AggregationMode aggregation_mode_from_string(const std::string &s)
{
  if (s == "per_sample_mean") {
    return AggregationMode::per_sample_mean;
  }
  if (s == "aggregate_then_score" || s == "aggregate") {
    return AggregationMode::aggregate_then_score;
  }
  throw ConfigError("unknown aggregation mode '" + s + "'");
}

/// One evaluated sample: prediction (empty when generation failed) and
/// ground truth.
struct EvalPair
{
  std::string id;
  std::string style;
  std::optional<PredictedSequence> pred;
  PredictedSequence gt;
};

struct GroupMetrics
{
  std::size_t n_total = 0;
  std::size_t n_generated = 0;
  double psr = 0.0;
  double mr = 0.0;
  std::optional<double> ade, fde, kce, mae_v, mae_theta;
  /// Zero when nothing was generated, empty when a kinematic input is
  /// missing.
  std::optional<double> s_final;

  double generation_rate() const
  {
    return n_total == 0 ? 0.0 : static_cast<double>(n_generated) / static_cast<double>(n_total);
  }
};

struct MetricsReport
{
  AggregationMode mode = AggregationMode::per_sample_mean;
  GroupMetrics overall;
  std::map<std::string, GroupMetrics> per_style;
};

namespace detail
{

inline std::optional<double> mean_of(const std::vector<SampleMetrics> &ms,
                                     std::optional<double> SampleMetrics::*field)
{
  double sum = 0.0;
  for (const auto &m : ms) {
    if (!(m.*field)) {
      return std::nullopt;
    }
    sum += *(m.*field);
  }
  return sum / static_cast<double>(ms.size());
}

inline GroupMetrics summarize(const std::vector<SampleMetrics> &ms, std::size_t n_total,
                              AggregationMode mode)
{
  GroupMetrics g;
  g.n_total = n_total;
  g.n_generated = ms.size();
  if (ms.empty()) {
    g.s_final = 0.0;
    return g;
  }
  const auto n = static_cast<double>(ms.size());
  double ade = 0.0, fde = 0.0, succ = 0.0, miss = 0.0;
  for (const auto &m : ms) {
    ade += m.ade;
    fde += m.fde;
    succ += m.success ? 1.0 : 0.0;
    miss += m.miss ? 1.0 : 0.0;
  }
  g.psr = succ / n;
  g.mr = miss / n;
  g.ade = ade / n;
  g.fde = fde / n;
  g.kce = mean_of(ms, &SampleMetrics::kce);
  g.mae_v = mean_of(ms, &SampleMetrics::mae_v);
  g.mae_theta = mean_of(ms, &SampleMetrics::mae_theta);
  if (mode == AggregationMode::aggregate_then_score) {
    g.s_final = composite_score({g.psr, g.mr, *g.ade, *g.fde, g.kce, g.mae_v, g.mae_theta}).s_final;
  } else {
    double total = 0.0;
    bool complete = true;
    for (const auto &m : ms) {
      const auto s = composite_score({m.success ? 1.0 : 0.0, m.miss ? 1.0 : 0.0, m.ade, m.fde,
                                      m.kce, m.mae_v, m.mae_theta});
      if (!s.s_final) {
        complete = false;
        break;
      }
      total += *s.s_final;
    }
    if (complete) {
      g.s_final = total / n;
    }
  }
  return g;
}

}  // namespace detail

/// Metrics over generated samples only; non-generated samples count toward
/// the totals.
inline MetricsReport build_report(const std::vector<EvalPair> &pairs,
                                  AggregationMode mode = AggregationMode::per_sample_mean,
                                  const Thresholds &thresholds = {})
{
  MetricsReport report;
  report.mode = mode;
  std::vector<SampleMetrics> all;
  std::map<std::string, std::vector<SampleMetrics>> by_style;
  std::map<std::string, std::size_t> totals;
  for (const auto &p : pairs) {
    ++totals[p.style];
    by_style[p.style];
    if (!p.pred) {
      continue;
    }
    const SampleMetrics m = sample_metrics(*p.pred, p.gt, thresholds);
    all.push_back(m);
    by_style[p.style].push_back(m);
  }
  report.overall = detail::summarize(all, pairs.size(), mode);
  for (const auto &[style, ms] : by_style) {
    report.per_style[style] = detail::summarize(ms, totals[style], mode);
  }
  return report;
}

namespace detail
{

inline Json optional_number(const std::optional<double> &v)
{
  return v ? Json(*v) : Json(nullptr);
}

inline Json group_to_json(const GroupMetrics &g)
{
  Json j = Json::object();
  j["n_total"] = g.n_total;
  j["n_generated"] = g.n_generated;
  j["generation_rate"] = g.generation_rate();
  j["psr"] = g.n_generated ? Json(g.psr) : Json(nullptr);
  j["mr"] = g.n_generated ? Json(g.mr) : Json(nullptr);
  j["ade"] = optional_number(g.ade);
  j["fde"] = optional_number(g.fde);
  j["kce"] = optional_number(g.kce);
  j["mae_v"] = optional_number(g.mae_v);
  j["mae_theta"] = optional_number(g.mae_theta);
  j["s_final"] = optional_number(g.s_final);
  return j;
}

inline std::string csv_cell(const std::optional<double> &v)
{
  return v ? fixed(*v, 6) : std::string("");
}

inline std::string group_to_csv(const std::string &name, const GroupMetrics &g)
{
  const bool gen = g.n_generated > 0;
  return name + "," + std::to_string(g.n_total) + "," + std::to_string(g.n_generated) + "," +
         csv_cell(gen ? std::optional<double>(g.psr) : std::nullopt) + "," +
         csv_cell(gen ? std::optional<double>(g.mr) : std::nullopt) + "," + csv_cell(g.ade) + "," +
         csv_cell(g.fde) + "," + csv_cell(g.kce) + "," + csv_cell(g.mae_v) + "," +
         csv_cell(g.mae_theta) + "," + csv_cell(g.s_final) + "\n";
}

}  // namespace detail

inline Json report_to_json(const MetricsReport &r)
{
  Json j = detail::group_to_json(r.overall);
  j["aggregation_mode"] = to_string(r.mode);
  Json styles = Json::object();
  for (const auto &[style, g] : r.per_style) {
    styles[style] = detail::group_to_json(g);
  }
  j["per_style"] = std::move(styles);
  return j;
}

inline std::string report_to_csv(const MetricsReport &r)
{
  std::string out = "group,n_total,n_generated,psr,mr,ade,fde,kce,mae_v,mae_theta,s_final\n";
  out += detail::group_to_csv("all", r.overall);
  for (const auto &[style, g] : r.per_style) {
    out += detail::group_to_csv(style, g);
  }
  return out;
}

}  // namespace drivestyle
