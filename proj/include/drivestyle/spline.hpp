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
#include <cstddef>
#include <span>
#include <vector>

#include "drivestyle/common.hpp"

namespace drivestyle
{

/// Natural cubic spline y(x) through strictly increasing knots.
class CubicSpline1D
{
public:
  CubicSpline1D() = default;

  CubicSpline1D(std::span<const double> x, std::span<const double> y)
  : x_(x.begin(), x.end()), a_(y.begin(), y.end())
  {
    const std::size_t n = x_.size();
    if (n < 2 || y.size() != n) {
      throw InvariantError("cubic spline needs at least two knots with matching values");
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (!(x_[i + 1] > x_[i])) {
        throw InvariantError("cubic spline knots must be strictly increasing");
      }
    }
    b_.assign(n, 0.0);
    c_.assign(n, 0.0);
    d_.assign(n, 0.0);
    if (n == 2) {
      b_[0] = (a_[1] - a_[0]) / (x_[1] - x_[0]);
      b_[1] = b_[0];
      return;
    }
    // Thomas algorithm on the natural-boundary system for c.
    std::vector<double> h(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x_[i + 1] - x_[i];
    }
    std::vector<double> diag(n, 1.0), upper(n, 0.0), lower(n, 0.0), rhs(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      lower[i] = h[i - 1];
      diag[i] = 2.0 * (h[i - 1] + h[i]);
      upper[i] = h[i];
      rhs[i] = 3.0 * ((a_[i + 1] - a_[i]) / h[i] - (a_[i] - a_[i - 1]) / h[i - 1]);
    }
    for (std::size_t i = 1; i < n; ++i) {
      const double m = lower[i] / diag[i - 1];
      diag[i] -= m * upper[i - 1];
      rhs[i] -= m * rhs[i - 1];
    }
    c_[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
      c_[i] = (rhs[i] - upper[i] * c_[i + 1]) / diag[i];
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
      b_[i] = (a_[i + 1] - a_[i]) / h[i] - h[i] * (c_[i + 1] + 2.0 * c_[i]) / 3.0;
      d_[i] = (c_[i + 1] - c_[i]) / (3.0 * h[i]);
    }
  }

  double value(double x) const
  {
    const auto [i, dx] = locate(x);
    return a_[i] + (b_[i] + (c_[i] + d_[i] * dx) * dx) * dx;
  }

  double first(double x) const
  {
    const auto [i, dx] = locate(x);
    return b_[i] + (2.0 * c_[i] + 3.0 * d_[i] * dx) * dx;
  }

  double second(double x) const
  {
    const auto [i, dx] = locate(x);
    return 2.0 * c_[i] + 6.0 * d_[i] * dx;
  }

  std::span<const double> knots() const { return x_; }

private:
  std::pair<std::size_t, double> locate(double x) const
  {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    i = std::min(i, x_.size() - 2);
    return {i, x - x_[i]};
  }

  std::vector<double> x_, a_, b_, c_, d_;
};

}  // namespace drivestyle
