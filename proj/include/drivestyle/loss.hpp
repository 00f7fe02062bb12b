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

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "drivestyle/common.hpp"
#include "drivestyle/scenario.hpp"

namespace drivestyle
{

/// Channel order of a predicted state: (x, y, v, a, theta).
enum Channel : int { kX = 0, kY = 1, kV = 2, kA = 3, kTheta = 4 };
inline constexpr int kChannels = 5;

/// State sequence at a uniform step; times are implied by index * dt.
struct PredictedSequence
{
  double dt = 0.5;
  /// One row per state, columns in Channel order.
  Eigen::Matrix<double, Eigen::Dynamic, kChannels> states;
  /// False when the producer emitted positions only (v, a, theta unknown).
  bool kinematic = true;

  Eigen::Index size() const { return states.rows(); }

  void validate() const
  {
    if (states.rows() < 2) {
      throw DomainError("predicted sequence needs at least two states");
    }
    if (!(dt > 0.0)) {
      throw DomainError("predicted sequence dt must be positive");
    }
    if (!states.allFinite()) {
      throw DomainError("predicted sequence contains non-finite values");
    }
  }

  static PredictedSequence from_trajectory(const Trajectory &traj)
  {
    PredictedSequence seq;
    seq.dt = traj.dt;
    seq.states.resize(static_cast<Eigen::Index>(traj.states.size()), kChannels);
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
      const auto &s = traj.states[i];
      seq.states.row(static_cast<Eigen::Index>(i)) << s.x, s.y, s.v, s.a, s.theta;
    }
    return seq;
  }
};

using SequenceGradient = Eigen::Matrix<double, Eigen::Dynamic, kChannels>;

struct LossConfig
{
  std::array<double, kChannels> reg_channel_weights = {2.0, 2.0, 0.5, 0.5, 0.5};
  double w_pikc = 1.5;
  double logvar_ce = 0.0;
  double logvar_reg = 0.0;

  void validate() const
  {
    for (double w : reg_channel_weights) {
      if (!(w >= 0.0)) {
        throw ConfigError("regression channel weights must be non-negative");
      }
    }
    if (!(w_pikc >= 0.0)) {
      throw ConfigError("w_pikc must be non-negative");
    }
  }
};

struct CeResult
{
  double value = 0.0;
  Eigen::MatrixXd grad;
};

/// Mean token cross-entropy of row-wise softmax(logits) against targets.
inline CeResult ce_loss(const Eigen::MatrixXd &logits, std::span<const int> targets)
{
  const Eigen::Index n = logits.rows();
  const Eigen::Index vocab = logits.cols();
  if (n != static_cast<Eigen::Index>(targets.size()) || n == 0) {
    throw DomainError("logits rows must match a non-empty target list");
  }
  if (vocab < 2) {
    throw DomainError("vocabulary must have at least two entries");
  }
  CeResult r;
  r.grad.resize(n, vocab);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int target = targets[static_cast<std::size_t>(i)];
    if (target < 0 || target >= vocab) {
      throw DomainError("target index " + std::to_string(target) + " outside the vocabulary");
    }
    const double peak = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (logits.row(i).array() - peak).exp();
    const double z = e.sum();
    r.value += std::log(z) + peak - logits(i, target);
    r.grad.row(i) = e / z;
    r.grad(i, target) -= 1.0;
  }
  r.value /= static_cast<double>(n);
  r.grad /= static_cast<double>(n);
  return r;
}

struct SequenceLoss
{
  double value = 0.0;
  SequenceGradient grad;
};

/// Sum over channels of weight * mean squared error.
inline SequenceLoss reg_loss(const PredictedSequence &pred, const PredictedSequence &gt,
                             const std::array<double, kChannels> &weights)
{
  if (pred.size() != gt.size() || pred.size() == 0) {
    throw DomainError("prediction and ground truth lengths differ");
  }
  if (std::abs(pred.dt - gt.dt) > 1e-12) {
    throw DomainError("prediction and ground truth step sizes differ");
  }
  const auto n = static_cast<double>(pred.size());
  SequenceLoss r;
  const SequenceGradient diff = pred.states - gt.states;
  r.grad.resize(pred.size(), kChannels);
  for (int c = 0; c < kChannels; ++c) {
    const double w = weights[static_cast<std::size_t>(c)];
    r.value += w * diff.col(c).squaredNorm() / n;
    r.grad.col(c) = (2.0 * w / n) * diff.col(c);
  }
  return r;
}

/// Constant-acceleration extrapolation of the position one step ahead.
inline Vec2 kinematic_rollout(double x, double y, double v, double a, double theta, double dt)
{
  const double travel = v * dt + 0.5 * a * dt * dt;
  return {x + travel * std::cos(theta), y + travel * std::sin(theta)};
}

inline Vec2 kinematic_rollout(const TrajState &s, double dt)
{
  return kinematic_rollout(s.x, s.y, s.v, s.a, s.theta, dt);
}

/// Mean squared gap between each next position and the rollout of the
/// previous state.
inline SequenceLoss pikc_loss(const PredictedSequence &pred)
{
  if (pred.size() < 2) {
    throw DomainError("kinematic consistency needs at least two states");
  }
  const double dt = pred.dt;
  const auto transitions = static_cast<double>(pred.size() - 1);
  SequenceLoss r;
  r.grad = SequenceGradient::Zero(pred.size(), kChannels);
  for (Eigen::Index t = 0; t + 1 < pred.size(); ++t) {
    const auto s = pred.states.row(t);
    const Vec2 roll = kinematic_rollout(s(kX), s(kY), s(kV), s(kA), s(kTheta), dt);
    const double ex = pred.states(t + 1, kX) - roll.x();
    const double ey = pred.states(t + 1, kY) - roll.y();
    r.value += ex * ex + ey * ey;

    const double gx = 2.0 * ex / transitions;
    const double gy = 2.0 * ey / transitions;
    const double c = std::cos(s(kTheta));
    const double sn = std::sin(s(kTheta));
    const double travel = s(kV) * dt + 0.5 * s(kA) * dt * dt;
    r.grad(t + 1, kX) += gx;
    r.grad(t + 1, kY) += gy;
    r.grad(t, kX) -= gx;
    r.grad(t, kY) -= gy;
    r.grad(t, kV) -= (gx * c + gy * sn) * dt;
    r.grad(t, kA) -= (gx * c + gy * sn) * 0.5 * dt * dt;
    r.grad(t, kTheta) -= (-gx * sn + gy * c) * travel;
  }
  r.value /= transitions;
  return r;
}

/// Channel-weighted regression plus w_pikc times the consistency loss.
inline SequenceLoss reg_total(const PredictedSequence &pred, const PredictedSequence &gt,
                              const LossConfig &config)
{
  SequenceLoss reg = reg_loss(pred, gt, config.reg_channel_weights);
  const SequenceLoss pikc = pikc_loss(pred);
  reg.value += config.w_pikc * pikc.value;
  reg.grad += config.w_pikc * pikc.grad;
  return reg;
}

struct HybridResult
{
  double value = 0.0;
  double d_logvar_ce = 0.0;
  double d_logvar_reg = 0.0;
  double d_l_ce = 0.0;
  double d_l_reg_total = 0.0;
};

/// Uncertainty-weighted combination of the token and regression losses.
inline HybridResult hybrid_total(double l_ce, double l_reg_total, double logvar_ce,
                                 double logvar_reg)
{
  if (l_ce < 0.0 || l_reg_total < 0.0) {
    throw DomainError("hybrid loss components must be non-negative");
  }
  HybridResult r;
  const double p_ce = std::exp(-logvar_ce);
  const double p_reg = std::exp(-logvar_reg);
  r.value = (p_ce * l_ce + 0.5 * logvar_ce) + 0.5 * (p_reg * l_reg_total + logvar_reg);
  r.d_logvar_ce = -p_ce * l_ce + 0.5;
  r.d_logvar_reg = 0.5 * (-p_reg * l_reg_total + 1.0);
  r.d_l_ce = p_ce;
  r.d_l_reg_total = 0.5 * p_reg;
  return r;
}

}  // namespace drivestyle
