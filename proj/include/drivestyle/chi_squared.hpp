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

#include <boost/math/special_functions/gamma.hpp>

#include "drivestyle/common.hpp"

namespace drivestyle
{

namespace detail
{

inline void check_gamma_args(double a, double x)
{
  if (!(a > 0.0) || x < 0.0 || std::isnan(x)) {
    throw DomainError("regularized gamma needs a > 0 and x >= 0");
  }
}

}  // namespace detail

/// Regularized lower incomplete gamma P(a, x).
inline double regularized_gamma_p(double a, double x)
{
  detail::check_gamma_args(a, x);
  return std::isinf(x) ? 1.0 : boost::math::gamma_p(a, x);
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
inline double regularized_gamma_q(double a, double x)
{
  detail::check_gamma_args(a, x);
  return std::isinf(x) ? 0.0 : boost::math::gamma_q(a, x);
}

inline double chi_squared_cdf(double x, double dof)
{
  return x <= 0.0 ? 0.0 : regularized_gamma_p(0.5 * dof, 0.5 * x);
}

inline double chi_squared_survival(double x, double dof)
{
  return x <= 0.0 ? 1.0 : regularized_gamma_q(0.5 * dof, 0.5 * x);
}

/// Quantile of the chi-squared distribution.
inline double chi_squared_quantile(double p, double dof)
{
  if (!(p >= 0.0 && p < 1.0)) {
    throw DomainError("chi-squared quantile needs p in [0, 1)");
  }
  return p == 0.0 ? 0.0 : 2.0 * boost::math::gamma_p_inv(0.5 * dof, p);
}

inline constexpr double kFeatureDof = 6.0;

/// Conformance score S = 100 (1 - F(d_m^2)) for a Mahalanobis distance d_m.
inline double conformance_score(double mahalanobis_distance, double dof = kFeatureDof)
{
  if (!(mahalanobis_distance >= 0.0)) {
    throw DomainError("Mahalanobis distance must be non-negative");
  }
  return 100.0 * chi_squared_survival(mahalanobis_distance * mahalanobis_distance, dof);
}

}  // namespace drivestyle
