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

bool well_formed(const std::string &svg)
{
  return svg.rfind("<svg", 0) == 0 && svg.size() > 7 && svg.substr(svg.size() - 7) == "</svg>\n";
}

TEST(Plot, EmptyBarChartIsValid)
{
  const std::string svg = plot::bar_chart("empty", {}, {});
  EXPECT_TRUE(well_formed(svg));
  EXPECT_NE(svg.find("no data"), std::string::npos);
  const std::string nulls = plot::bar_chart("nulls", {"a"}, {{"s", {std::nullopt}}});
  EXPECT_NE(nulls.find("no data"), std::string::npos);
}

TEST(Plot, EmptyLineChartIsValid)
{
  const std::string svg = plot::line_chart("empty", "epoch", {{"loss", {}}});
  EXPECT_TRUE(well_formed(svg));
  EXPECT_NE(svg.find("no data"), std::string::npos);
}

TEST(Plot, BarsAreDrawn)
{
  const std::string svg =
      plot::bar_chart("scores", {"Comfort", "Sporty"}, {{"ADE", {1.5, 2.0}}, {"FDE", {3.0, std::nullopt}}});
  EXPECT_TRUE(well_formed(svg));
  std::size_t rects = 0;
  for (std::size_t p = svg.find("<rect"); p != std::string::npos; p = svg.find("<rect", p + 1)) {
    ++rects;
  }
  // Three bars plus two legend swatches.
  EXPECT_GE(rects, 5u);
  EXPECT_EQ(svg.find("no data"), std::string::npos);
}

TEST(Plot, Deterministic)
{
  const std::vector<plot::LineSeries> series = {{"a", {{0, 1}, {1, 0.5}, {2, 0.25}}},
                                                {"b", {{0, 2}, {1, 1}}}};
  EXPECT_EQ(plot::line_chart("t", "x", series, "seed 1"), plot::line_chart("t", "x", series, "seed 1"));
}

TEST(Plot, TitleIsEscaped)
{
  const std::string svg = plot::bar_chart("a<b&c", {}, {});
  EXPECT_NE(svg.find("a&lt;b&amp;c"), std::string::npos);
}

}  // namespace
}  // namespace drivestyle
