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

#include <Eigen/Dense>

#include <array>
#include <cstddef>

namespace drivestyle
{

/// Polynomial c0 + c1 t + ... + cN t^N with derivative evaluation.
template <std::size_t Degree>
class Polynomial
{
public:
  using Coefficients = std::array<double, Degree + 1>;

  Polynomial() { coeffs_.fill(0.0); }
  explicit Polynomial(const Coefficients &c) : coeffs_(c) {}

  const Coefficients &coefficients() const { return coeffs_; }

  /// Value of the `order`-th derivative at t (Horner on the derived series).
  double eval(double t, int order = 0) const
  {
    double result = 0.0;
    for (std::size_t i = Degree + 1; i-- > static_cast<std::size_t>(order);) {
      double factor = 1.0;
      for (int k = 0; k < order; ++k) {
        factor *= static_cast<double>(i - k);
      }
      result = result * t + factor * coeffs_[i];
    }
    return result;
  }

  bool operator==(const Polynomial &) const = default;

private:
  Coefficients coeffs_;
};

using QuinticPolynomial = Polynomial<5>;
using QuarticPolynomial = Polynomial<4>;

/// Quintic with prescribed position, velocity and acceleration at 0 and T.
inline QuinticPolynomial fit_quintic(double x0, double v0, double a0, double x1, double v1,
                                     double a1, double T)
{
  const double t2 = T * T, t3 = t2 * T, t4 = t3 * T, t5 = t4 * T;
  Eigen::Matrix3d A;
  A << t3, t4, t5, 3 * t2, 4 * t3, 5 * t4, 6 * T, 12 * t2, 20 * t3;
  const Eigen::Vector3d b(x1 - x0 - v0 * T - 0.5 * a0 * t2, v1 - v0 - a0 * T, a1 - a0);
  const Eigen::Vector3d c = A.fullPivLu().solve(b);
  return QuinticPolynomial({x0, v0, 0.5 * a0, c[0], c[1], c[2]});
}

/// Quartic with prescribed position, velocity, acceleration at 0 and
/// velocity, acceleration at T (no end-position constraint).
inline QuarticPolynomial fit_quartic(double x0, double v0, double a0, double v1, double a1, double T)
{
  const double t2 = T * T, t3 = t2 * T;
  Eigen::Matrix2d A;
  A << 3 * t2, 4 * t3, 6 * T, 12 * t2;
  const Eigen::Vector2d b(v1 - v0 - a0 * T, a1 - a0);
  const Eigen::Vector2d c = A.fullPivLu().solve(b);
  return QuarticPolynomial({x0, v0, 0.5 * a0, c[0], c[1]});
}

}  // namespace drivestyle
