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

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "drivestyle/chi_squared.hpp"
#include "drivestyle/common.hpp"
#include "drivestyle/json_util.hpp"
#include "drivestyle/random.hpp"
#include "drivestyle/scenario.hpp"
#include "drivestyle/style_cost.hpp"

namespace drivestyle
{

inline constexpr std::array<const char *, 6> kFeatureNames = {"v_mean", "v_std",  "a_rms",
                                                              "a_abs_max", "j_rms", "j_std"};

/// Per-trajectory kinematic summary (v_mean, v_std, a_rms, a_abs_max,
/// j_rms, j_std).
struct FeatureVector
{
  double v_mean = 0.0;
  double v_std = 0.0;
  double a_rms = 0.0;
  double a_abs_max = 0.0;
  double j_rms = 0.0;
  double j_std = 0.0;

  Eigen::Matrix<double, 6, 1> vector() const
  {
    Eigen::Matrix<double, 6, 1> out;
    out << v_mean, v_std, a_rms, a_abs_max, j_rms, j_std;
    return out;
  }

  static FeatureVector from_vector(const Eigen::Matrix<double, 6, 1> &v)
  {
    return {v(0), v(1), v(2), v(3), v(4), v(5)};
  }

  bool operator==(const FeatureVector &) const = default;
};

inline Json features_to_json(const FeatureVector &f)
{
  const auto v = f.vector();
  Json j = Json::object();
  for (int i = 0; i < 6; ++i) {
    j[kFeatureNames[static_cast<std::size_t>(i)]] = v(i);
  }
  return j;
}

namespace detail
{

inline std::pair<double, double> mean_and_std(const std::vector<double> &xs)
{
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double var = 0.0;
  for (double x : xs) {
    var += (x - mean) * (x - mean);
  }
  return {mean, std::sqrt(var / n)};
}

}  // namespace detail

/// Aggregates one trajectory into a single feature vector. Standard
/// deviations are population (1/N) statistics.
inline FeatureVector extract_features(const Trajectory &traj)
{
  const auto &st = traj.states;
  if (st.size() < 4) {
    throw DomainError("feature extraction needs a trajectory of at least four states");
  }
  std::vector<double> v, jerk;
  double a_sq = 0.0, a_max = 0.0;
  for (const auto &s : st) {
    v.push_back(s.v);
    a_sq += s.a * s.a;
    a_max = std::max(a_max, std::abs(s.a));
  }
  for (std::size_t i = 0; i + 1 < st.size(); ++i) {
    jerk.push_back((st[i + 1].a - st[i].a) / traj.dt);
  }
  FeatureVector f;
  std::tie(f.v_mean, f.v_std) = detail::mean_and_std(v);
  f.a_rms = std::sqrt(a_sq / static_cast<double>(st.size()));
  f.a_abs_max = a_max;
  double j_sq = 0.0;
  for (double j : jerk) {
    j_sq += j * j;
  }
  f.j_rms = std::sqrt(j_sq / static_cast<double>(jerk.size()));
  f.j_std = detail::mean_and_std(jerk).second;
  return f;
}

struct McdOptions
{
  double support_fraction = 0.75;
  std::size_t trials = 500;
  std::size_t keep_best = 10;
  /// Above this many rows the initial search runs on a random subsample.
  std::size_t subsample = 1500;
  std::size_t max_refine = 200;
  /// Optional per-column variance added to every scatter estimate, so that
  /// point masses in the data cannot drive the determinant to zero. Empty
  /// means plain MCD.
  Eigen::VectorXd variance_floor;
};

/// Robust location/scatter estimate (rows of the data are observations).
struct McdFit
{
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
  /// Indices of the final h-subset, ascending.
  std::vector<std::size_t> support;
  double support_fraction = 0.75;
  double consistency = 1.0;
};

namespace mcd
{

inline constexpr double kRegularization = 1e-9;

struct Estimate
{
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
  double log_det = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> subset;
};

/// Adds eps * trace / d * I when the scatter is not numerically positive
/// definite. Returns false when the scatter is identically zero.
inline bool regularize(Eigen::MatrixXd &sigma)
{
  const auto d = static_cast<double>(sigma.rows());
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  const Eigen::VectorXd diag = sigma.diagonal();
  const double trace = diag.sum();
  bool ok = llt.info() == Eigen::Success;
  if (ok) {
    const Eigen::VectorXd l = llt.matrixL().toDenseMatrix().diagonal();
    ok = l.minCoeff() > 1e-7 * std::sqrt(std::max(diag.maxCoeff(), 0.0));
  }
  if (ok) {
    return true;
  }
  if (!(trace > 0.0)) {
    return false;
  }
  sigma.diagonal().array() += kRegularization * trace / d;
  return true;
}

inline Estimate estimate(const Eigen::MatrixXd &data, const std::vector<std::size_t> &subset,
                         const Eigen::VectorXd &floor = {})
{
  const auto d = data.cols();
  Estimate e;
  e.subset = subset;
  e.mu = Eigen::VectorXd::Zero(d);
  for (std::size_t i : subset) {
    e.mu += data.row(static_cast<Eigen::Index>(i)).transpose();
  }
  e.mu /= static_cast<double>(subset.size());
  e.sigma = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i : subset) {
    const Eigen::VectorXd c = data.row(static_cast<Eigen::Index>(i)).transpose() - e.mu;
    e.sigma.noalias() += c * c.transpose();
  }
  e.sigma /= static_cast<double>(subset.size());
  if (floor.size() == d) {
    e.sigma.diagonal() += floor;
  }
  if (!regularize(e.sigma)) {
    return e;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(e.sigma);
  if (llt.info() != Eigen::Success) {
    return e;
  }
  const Eigen::MatrixXd l = llt.matrixL();
  e.log_det = 2.0 * l.diagonal().array().log().sum();
  return e;
}

inline std::vector<double> squared_distances(const Eigen::MatrixXd &data, const Eigen::VectorXd &mu,
                                             const Eigen::MatrixXd &sigma)
{
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw DegenerateDataError("scatter matrix is not positive definite");
  }
  Eigen::MatrixXd centered = data.rowwise() - mu.transpose();
  const Eigen::MatrixXd solved = llt.matrixL().solve(centered.transpose());
  std::vector<double> out(static_cast<std::size_t>(data.rows()));
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = solved.col(i).squaredNorm();
  }
  return out;
}

/// Indices of the h smallest distances (ties by index), ascending.
inline std::vector<std::size_t> smallest(const std::vector<double> &dist, std::size_t h)
{
  std::vector<std::size_t> idx(dist.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto less = [&](std::size_t a, std::size_t b) {
    return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
  };
  std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(h - 1), idx.end(), less);
  idx.resize(h);
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline Estimate concentrate(const Eigen::MatrixXd &data, Estimate e, std::size_t h,
                            std::size_t steps, const Eigen::VectorXd &floor = {})
{
  for (std::size_t k = 0; k < steps && std::isfinite(e.log_det); ++k) {
    Estimate next = estimate(data, smallest(squared_distances(data, e.mu, e.sigma), h), floor);
    const bool converged = next.subset == e.subset || !(next.log_det < e.log_det);
    if (next.log_det <= e.log_det) {
      e = std::move(next);
    }
    if (converged) {
      break;
    }
  }
  return e;
}

}  // namespace mcd

/// FAST-MCD: random elemental starts, two concentration steps each, full
/// concentration of the best few, consistency correction of the scatter.
inline McdFit fit_mcd(const Eigen::MatrixXd &data, std::uint64_t seed, McdOptions options = {})
{
  const auto n = static_cast<std::size_t>(data.rows());
  const auto p = static_cast<std::size_t>(data.cols());
  if (!data.allFinite()) {
    throw DegenerateDataError("MCD input contains non-finite values");
  }
  if (p == 0 || n < 2 * (p + 1)) {
    throw DegenerateDataError("MCD needs at least " + std::to_string(2 * (p + 1)) +
                              " samples, got " + std::to_string(n));
  }
  const double sf = options.support_fraction;
  if (!(sf > 0.5 && sf <= 1.0)) {
    throw ConfigError("support fraction must lie in (0.5, 1]");
  }
  {
    const Eigen::RowVectorXd first = data.row(0);
    if (((data.rowwise() - first).array().abs() == 0.0).all()) {
      throw DegenerateDataError("all samples are identical (zero scatter)");
    }
  }
  const auto h = std::max<std::size_t>(p + 1, static_cast<std::size_t>(std::llround(sf * n)));
  const Eigen::VectorXd &floor = options.variance_floor;
  if (floor.size() != 0 && (floor.size() != data.cols() || (floor.array() < 0.0).any() ||
                            !floor.allFinite())) {
    throw ConfigError("variance floor must hold one non-negative value per column");
  }

  Rng rng(seed);
  // Initial search, possibly on a subsample.
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  if (n > options.subsample) {
    for (std::size_t i = 0; i < options.subsample; ++i) {
      std::swap(rows[i], rows[i + rng.below(n - i)]);
    }
    rows.resize(options.subsample);
    std::sort(rows.begin(), rows.end());
  }
  Eigen::MatrixXd work(static_cast<Eigen::Index>(rows.size()), data.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    work.row(static_cast<Eigen::Index>(i)) = data.row(static_cast<Eigen::Index>(rows[i]));
  }
  const std::size_t m = rows.size();
  const auto h_work = std::max<std::size_t>(p + 1, static_cast<std::size_t>(std::llround(sf * m)));

  std::vector<mcd::Estimate> starts;
  std::vector<std::size_t> perm(m);
  for (std::size_t trial = 0; trial < options.trials; ++trial) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::vector<std::size_t> subset;
    mcd::Estimate e;
    // Grow the elemental subset until its scatter is non-singular.
    for (std::size_t k = 0; k < m; ++k) {
      std::swap(perm[k], perm[k + rng.below(m - k)]);
      subset.push_back(perm[k]);
      if (subset.size() < p + 1) {
        continue;
      }
      std::vector<std::size_t> sorted = subset;
      std::sort(sorted.begin(), sorted.end());
      e = mcd::estimate(work, sorted, floor);
      Eigen::LLT<Eigen::MatrixXd> llt(e.sigma);
      if (std::isfinite(e.log_det) && llt.info() == Eigen::Success) {
        break;
      }
    }
    if (!std::isfinite(e.log_det)) {
      continue;
    }
    starts.push_back(mcd::concentrate(work, std::move(e), h_work, 2, floor));
  }
  if (starts.empty()) {
    throw DegenerateDataError("no non-singular elemental subset found");
  }
  std::stable_sort(starts.begin(), starts.end(),
                   [](const auto &a, const auto &b) { return a.log_det < b.log_det; });
  starts.resize(std::min(starts.size(), options.keep_best));

  mcd::Estimate best;
  for (auto &s : starts) {
    mcd::Estimate e = std::move(s);
    if (m != n) {
      // Restart from the subsample estimate on the full data.
      e = mcd::estimate(data, mcd::smallest(mcd::squared_distances(data, e.mu, e.sigma), h), floor);
    }
    e = mcd::concentrate(data, std::move(e), h, options.max_refine, floor);
    if (e.log_det < best.log_det) {
      best = std::move(e);
    }
  }
  if (!std::isfinite(best.log_det)) {
    throw DegenerateDataError("MCD scatter is singular");
  }

  McdFit fit;
  fit.mu = best.mu;
  fit.support = best.subset;
  fit.support_fraction = sf;
  const double q = static_cast<double>(h) / static_cast<double>(n);
  const double dof = static_cast<double>(p);
  fit.consistency = q < 1.0 ? q / chi_squared_cdf(chi_squared_quantile(q, dof), dof + 2.0) : 1.0;
  if (floor.size() != 0) {
    // The floor is not part of the sampled scatter; it is not rescaled.
    best.sigma.diagonal() -= floor;
    fit.sigma = fit.consistency * best.sigma;
    fit.sigma.diagonal() += floor;
  } else {
    fit.sigma = fit.consistency * best.sigma;
  }
  return fit;
}

/// Per-style Gaussian in feature space.
struct StyleDistribution
{
  Style style = Style::Default;
  Eigen::Matrix<double, 6, 1> mu = Eigen::Matrix<double, 6, 1>::Zero();
  Eigen::Matrix<double, 6, 6> sigma = Eigen::Matrix<double, 6, 6>::Identity();
  double support_fraction = 0.75;
  std::size_t n_fit = 0;
};

inline StyleDistribution fit_style_distribution(Style style, const std::vector<FeatureVector> &features,
                                                std::uint64_t seed, McdOptions options = {})
{
  Eigen::MatrixXd data(static_cast<Eigen::Index>(features.size()), 6);
  for (std::size_t i = 0; i < features.size(); ++i) {
    data.row(static_cast<Eigen::Index>(i)) = features[i].vector().transpose();
  }
  const McdFit fit = fit_mcd(data, seed, options);
  StyleDistribution dist;
  dist.style = style;
  dist.mu = fit.mu;
  dist.sigma = fit.sigma;
  dist.support_fraction = fit.support_fraction;
  dist.n_fit = features.size();
  return dist;
}

inline double mahalanobis(const Eigen::VectorXd &mu, const Eigen::MatrixXd &sigma,
                          const Eigen::VectorXd &x)
{
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw DegenerateDataError("covariance is singular");
  }
  const Eigen::VectorXd z = llt.matrixL().solve(x - mu);
  return z.norm();
}

inline double mahalanobis(const StyleDistribution &dist, const FeatureVector &f)
{
  return mahalanobis(dist.mu, dist.sigma, f.vector());
}

struct FilterOptions
{
  double support_fraction = 0.75;
  /// Samples are kept when their conformance score is strictly above this.
  double threshold = 80.0;
  /// Per-feature resolution (standard deviation); its square is the MCD
  /// variance floor. All zero gives plain MCD.
  FeatureVector resolution = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0};

  void validate() const
  {
    if (!(support_fraction > 0.5 && support_fraction <= 1.0)) {
      throw ConfigError("filter.support_fraction must lie in (0.5, 1]");
    }
    if (!(threshold > 0.0 && threshold < 100.0)) {
      throw ConfigError("filter.threshold must lie in (0, 100)");
    }
    const auto r = resolution.vector();
    if (!r.allFinite() || (r.array() < 0.0).any()) {
      throw ConfigError("filter.resolution entries must be finite and non-negative");
    }
  }
};

/// Filter options with the same resolution on every feature.
inline FilterOptions with_resolution(double sigma)
{
  FilterOptions o;
  o.resolution = {sigma, sigma, sigma, sigma, sigma, sigma};
  return o;
}

struct StyleFilterReport
{
  Style style = Style::Default;
  std::size_t count_in = 0;
  std::size_t count_retained = 0;
  std::optional<FeatureVector> mean_features;
  std::optional<StyleDistribution> distribution;
  std::optional<std::string> warning;
};

struct FilterResult
{
  /// Indices into the input, ascending.
  std::vector<std::size_t> retained;
  /// Score of every input sample (NaN for styles that could not be fit).
  std::vector<double> scores;
  std::vector<FeatureVector> features;
  std::vector<StyleFilterReport> styles;
};

/// Stage-2 filtering: per style, robust fit, score and keep S > threshold.
inline FilterResult filter_instances(const std::vector<std::pair<Style, const Trajectory *>> &items,
                                     std::uint64_t seed, const FilterOptions &options = {})
{
  options.validate();
  FilterResult result;
  result.features.reserve(items.size());
  for (const auto &[style, traj] : items) {
    result.features.push_back(extract_features(*traj));
  }
  result.scores.assign(items.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<char> keep(items.size(), 0);

  for (Style style : kAllStyles) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (items[i].first == style) {
        members.push_back(i);
      }
    }
    if (members.empty()) {
      continue;
    }
    StyleFilterReport rep;
    rep.style = style;
    rep.count_in = members.size();
    std::vector<FeatureVector> feats;
    for (std::size_t i : members) {
      feats.push_back(result.features[i]);
    }
    try {
      McdOptions mo;
      mo.support_fraction = options.support_fraction;
      if ((options.resolution.vector().array() > 0.0).any()) {
        mo.variance_floor = options.resolution.vector().array().square().matrix();
      }
      const StyleDistribution dist =
        fit_style_distribution(style, feats, seed + static_cast<std::uint64_t>(style), mo);
      Eigen::Matrix<double, 6, 1> sum = Eigen::Matrix<double, 6, 1>::Zero();
      for (std::size_t i : members) {
        const double score = conformance_score(mahalanobis(dist, result.features[i]));
        result.scores[i] = score;
        if (score > options.threshold) {
          keep[i] = 1;
          ++rep.count_retained;
          sum += result.features[i].vector();
        }
      }
      if (rep.count_retained > 0) {
        rep.mean_features = FeatureVector::from_vector(sum / static_cast<double>(rep.count_retained));
      }
      rep.distribution = dist;
    } catch (const DataError &e) {
      rep.warning = std::string("style skipped: ") + e.what();
    }
    result.styles.push_back(std::move(rep));
  }
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (keep[i]) {
      result.retained.push_back(i);
    }
  }
  return result;
}

inline Json matrix_to_json(const Eigen::MatrixXd &m)
{
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back(m(r, c));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json filter_report_to_json(const FilterResult &result)
{
  Json styles = Json::object();
  for (const auto &rep : result.styles) {
    Json j = Json::object();
    j["count_in"] = rep.count_in;
    j["count_retained"] = rep.count_retained;
    j["mean_features"] = rep.mean_features ? features_to_json(*rep.mean_features) : Json(nullptr);
    if (rep.distribution) {
      j["mu"] = matrix_to_json(rep.distribution->mu.transpose());
      j["mu"] = j["mu"][0];
      j["sigma"] = matrix_to_json(rep.distribution->sigma);
      j["support_fraction"] = rep.distribution->support_fraction;
    } else {
      j["mu"] = nullptr;
      j["sigma"] = nullptr;
    }
    if (rep.warning) {
      j["warning"] = *rep.warning;
    }
    styles[std::string(to_string(rep.style))] = std::move(j);
  }
  return styles;
}

}  // namespace drivestyle
