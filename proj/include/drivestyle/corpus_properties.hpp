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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "drivestyle/json_util.hpp"
#include "drivestyle/scenario.hpp"
#include "drivestyle/style_cost.hpp"
#include "drivestyle/style_filter.hpp"

namespace drivestyle
{

/// Sum of chord lengths between consecutive states.
inline double path_length(const Trajectory &traj)
{
  double total = 0.0;
  for (std::size_t i = 1; i < traj.states.size(); ++i) {
    total += std::hypot(traj.states[i].x - traj.states[i - 1].x,
                        traj.states[i].y - traj.states[i - 1].y);
  }
  return total;
}

struct StyleSummary
{
  Style style = Style::Default;
  FeatureVector mean_features;
  double mean_path_length = 0.0;
  std::size_t retained_count = 0;
};

struct CorpusSummary
{
  std::vector<StyleSummary> styles;
  std::vector<std::string> warnings;
};

inline CorpusSummary summarize_corpus(const std::vector<std::pair<Style, const Trajectory *>> &retained)
{
  CorpusSummary out;
  for (Style style : kAllStyles) {
    StyleSummary sum;
    sum.style = style;
    Eigen::Matrix<double, 6, 1> feat = Eigen::Matrix<double, 6, 1>::Zero();
    for (const auto &[st, traj] : retained) {
      if (st != style) {
        continue;
      }
      ++sum.retained_count;
      feat += extract_features(*traj).vector();
      sum.mean_path_length += path_length(*traj);
    }
    if (sum.retained_count == 0) {
      out.warnings.push_back(std::string(to_string(style)) + ": no retained trajectories");
      continue;
    }
    const auto n = static_cast<double>(sum.retained_count);
    sum.mean_features = FeatureVector::from_vector(feat / n);
    sum.mean_path_length /= n;
    out.styles.push_back(sum);
  }
  return out;
}

struct OrderingVerdict
{
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail
{

inline const StyleSummary *find_summary(const std::vector<StyleSummary> &s, Style style)
{
  for (const auto &x : s) {
    if (x.style == style) {
      return &x;
    }
  }
  return nullptr;
}

/// Whether `style` is strictly extreme in `value` among all summaries.
template <typename Fn>
OrderingVerdict strict_extreme(const std::vector<StyleSummary> &s, Style style, bool largest,
                               const std::string &name, Fn value)
{
  OrderingVerdict v;
  v.name = name;
  const StyleSummary *target = find_summary(s, style);
  if (!target || s.size() < kAllStyles.size()) {
    v.detail = "all five styles must be present";
    return v;
  }
  v.passed = true;
  for (const auto &x : s) {
    v.detail += (v.detail.empty() ? "" : ", ") + std::string(to_string(x.style)) + "=" +
                fixed(value(x), 4);
    if (x.style == style) {
      continue;
    }
    if (largest ? !(value(*target) > value(x)) : !(value(*target) < value(x))) {
      v.passed = false;
    }
  }
  return v;
}

}  // namespace detail

/// The ordinal claims checked on a filtered corpus: Sporty fastest and
/// longest, Safety shortest, Comfort smoother than Sporty.
inline std::vector<OrderingVerdict> check_style_orderings(const std::vector<StyleSummary> &s)
{
  std::vector<OrderingVerdict> out;
  out.push_back(detail::strict_extreme(s, Style::Sporty, true, "sporty_max_velocity",
                                       [](const StyleSummary &x) { return x.mean_features.v_mean; }));
  out.push_back(detail::strict_extreme(s, Style::Sporty, true, "sporty_max_path_length",
                                       [](const StyleSummary &x) { return x.mean_path_length; }));
  out.push_back(detail::strict_extreme(s, Style::Safety, false, "safety_min_path_length",
                                       [](const StyleSummary &x) { return x.mean_path_length; }));
  OrderingVerdict jerk;
  jerk.name = "comfort_jerk_below_sporty";
  const auto *comfort = detail::find_summary(s, Style::Comfort);
  const auto *sporty = detail::find_summary(s, Style::Sporty);
  if (comfort && sporty) {
    jerk.passed = comfort->mean_features.j_rms < sporty->mean_features.j_rms;
    jerk.detail = "Comfort=" + fixed(comfort->mean_features.j_rms, 4) +
                  ", Sporty=" + fixed(sporty->mean_features.j_rms, 4);
  } else {
    jerk.detail = "Comfort and Sporty must be present";
  }
  out.push_back(jerk);
  return out;
}

inline Json corpus_summary_to_json(const CorpusSummary &summary,
                                   const std::vector<OrderingVerdict> &verdicts)
{
  Json styles = Json::object();
  for (const auto &s : summary.styles) {
    Json j = Json::object();
    j["retained_count"] = s.retained_count;
    j["mean_features"] = features_to_json(s.mean_features);
    j["mean_path_length"] = s.mean_path_length;
    styles[std::string(to_string(s.style))] = std::move(j);
  }
  Json checks = Json::array();
  for (const auto &v : verdicts) {
    checks.push_back(Json::object({{"name", v.name}, {"passed", v.passed}, {"detail", v.detail}}));
  }
  Json out = Json::object();
  out["styles"] = std::move(styles);
  out["orderings"] = std::move(checks);
  out["warnings"] = summary.warnings;
  return out;
}

}  // namespace drivestyle
