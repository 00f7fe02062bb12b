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
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "drivestyle/common.hpp"

namespace drivestyle::plot
{

struct BarSeries
{
  std::string name;
  /// One value per category; empty entries are not drawn.
  std::vector<std::optional<double>> values;
};

struct LineSeries
{
  std::string name;
  std::vector<std::pair<double, double>> points;
};

inline constexpr double kWidth = 640.0;
inline constexpr double kHeight = 400.0;
inline constexpr double kLeft = 60.0;
inline constexpr double kRight = 20.0;
inline constexpr double kTop = 40.0;
inline constexpr double kBottom = 50.0;

inline const std::vector<std::string> &palette()
{
  static const std::vector<std::string> colors = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2",
                                                  "#59a14f", "#edc948", "#b07aa1"};
  return colors;
}

namespace detail
{

inline std::string escape(const std::string &s)
{
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

inline std::string open(const std::string &title, const std::string &metadata)
{
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
                  "viewBox=\"0 0 640 400\" font-family=\"sans-serif\" font-size=\"11\">\n";
  if (!metadata.empty()) {
    s += "<metadata>" + escape(metadata) + "</metadata>\n";
  }
  s += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  s += "<text x=\"320\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" + escape(title) +
       "</text>\n";
  return s;
}

inline std::string axes(double lo, double hi)
{
  std::string s = "<line x1=\"60\" y1=\"350\" x2=\"620\" y2=\"350\" stroke=\"black\"/>\n"
                  "<line x1=\"60\" y1=\"40\" x2=\"60\" y2=\"350\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = lo + (hi - lo) * i / 4.0;
    const double y = kHeight - kBottom - (kHeight - kTop - kBottom) * i / 4.0;
    s += "<text x=\"55\" y=\"" + fixed(y + 4.0, 1) + "\" text-anchor=\"end\">" + fixed(v, 3) +
         "</text>\n";
  }
  return s;
}

inline std::string empty_note()
{
  return "<text x=\"340\" y=\"200\" text-anchor=\"middle\" fill=\"#888888\">no data</text>\n";
}

}  // namespace detail

/// Grouped bar chart; an input without any value gives a valid chart with
/// a "no data" note.
inline std::string bar_chart(const std::string &title, const std::vector<std::string> &categories,
                             const std::vector<BarSeries> &series,
                             const std::string &metadata = "")
{
  std::string s = detail::open(title, metadata);
  double hi = 0.0, lo = 0.0;
  bool any = false;
  for (const auto &ser : series) {
    for (const auto &v : ser.values) {
      if (v && std::isfinite(*v)) {
        hi = std::max(hi, *v);
        lo = std::min(lo, *v);
        any = true;
      }
    }
  }
  if (!any || categories.empty()) {
    s += detail::axes(0.0, 1.0) + detail::empty_note() + "</svg>\n";
    return s;
  }
  if (hi == lo) {
    hi = lo + 1.0;
  }
  s += detail::axes(lo, hi);
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const double group_w = plot_w / static_cast<double>(categories.size());
  const double bar_w = 0.8 * group_w / static_cast<double>(std::max<std::size_t>(1, series.size()));
  auto y_of = [&](double v) { return kHeight - kBottom - plot_h * (v - lo) / (hi - lo); };
  for (std::size_t c = 0; c < categories.size(); ++c) {
    const double gx = kLeft + group_w * static_cast<double>(c);
    s += "<text x=\"" + fixed(gx + 0.5 * group_w, 1) + "\" y=\"366\" text-anchor=\"middle\">" +
         detail::escape(categories[c]) + "</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
      if (c >= series[k].values.size() || !series[k].values[c] ||
          !std::isfinite(*series[k].values[c])) {
        continue;
      }
      const double v = *series[k].values[c];
      const double x = gx + 0.1 * group_w + bar_w * static_cast<double>(k);
      const double y0 = y_of(std::max(v, 0.0)), y1 = y_of(std::min(v, 0.0));
      s += "<rect x=\"" + fixed(x, 1) + "\" y=\"" + fixed(y0, 1) + "\" width=\"" +
           fixed(bar_w, 1) + "\" height=\"" + fixed(y1 - y0, 1) + "\" fill=\"" +
           palette()[k % palette().size()] + "\"><title>" + detail::escape(series[k].name) + ": " +
           fixed(v, 4) + "</title></rect>\n";
    }
  }
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double x = kLeft + 110.0 * static_cast<double>(k);
    s += "<rect x=\"" + fixed(x, 1) + "\" y=\"380\" width=\"10\" height=\"10\" fill=\"" +
         palette()[k % palette().size()] + "\"/><text x=\"" + fixed(x + 14.0, 1) + "\" y=\"389\">" +
         detail::escape(series[k].name) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

inline std::string line_chart(const std::string &title, const std::string &x_label,
                              const std::vector<LineSeries> &series,
                              const std::string &metadata = "")
{
  std::string s = detail::open(title, metadata);
  double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
  for (const auto &ser : series) {
    for (const auto &[x, y] : ser.points) {
      xlo = std::min(xlo, x);
      xhi = std::max(xhi, x);
      ylo = std::min(ylo, y);
      yhi = std::max(yhi, y);
    }
  }
  if (xlo > xhi) {
    s += detail::axes(0.0, 1.0) + detail::empty_note() + "</svg>\n";
    return s;
  }
  if (xhi == xlo) {
    xhi = xlo + 1.0;
  }
  if (yhi == ylo) {
    yhi = ylo + 1.0;
  }
  s += detail::axes(ylo, yhi);
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  s += "<text x=\"340\" y=\"372\" text-anchor=\"middle\">" + detail::escape(x_label) + "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    std::string pts;
    for (const auto &[x, y] : series[k].points) {
      pts += (pts.empty() ? "" : " ") + fixed(kLeft + plot_w * (x - xlo) / (xhi - xlo), 1) + "," +
             fixed(kHeight - kBottom - plot_h * (y - ylo) / (yhi - ylo), 1);
    }
    s += "<polyline fill=\"none\" stroke=\"" + palette()[k % palette().size()] +
         "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
    const double lx = kLeft + 120.0 * static_cast<double>(k);
    s += "<rect x=\"" + fixed(lx, 1) + "\" y=\"380\" width=\"10\" height=\"10\" fill=\"" +
         palette()[k % palette().size()] + "\"/><text x=\"" + fixed(lx + 14.0, 1) + "\" y=\"389\">" +
         detail::escape(series[k].name) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace drivestyle::plot
