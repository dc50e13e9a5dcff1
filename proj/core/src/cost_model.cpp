// Copyright 2026 rbmpc authors
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

#include "rbmpc/cost_model.hpp"

#include <cmath>
#include <stdexcept>

namespace rbmpc {

namespace {

Eigen::Vector2d ego_center(const AugmentedState& x, double offset) {
  return Eigen::Vector2d(x.base.px + offset * std::cos(x.base.theta),
                         x.base.py + offset * std::sin(x.base.theta));
}

}  // namespace

void CostWeights::validate() const {
  const double w[] = {w_pos, w_heading, w_speed, w_a,
                      w_delta, w_da, w_ddelta, w_saf};
  for (double wi : w) {
    if (!(wi >= 0.0)) {
      throw std::invalid_argument("CostWeights: negative weight");
    }
  }
  if (!(d_prox > 0.0)) {
    throw std::invalid_argument("CostWeights: d_prox must be positive");
  }
  if (!(dt > 0.0)) {
    throw std::invalid_argument("CostWeights: dt must be positive");
  }
}

QuadraticModel QuadraticModel::zero(int nx, int nu) {
  QuadraticModel m;
  m.Hxx = Eigen::MatrixXd::Zero(nx, nx);
  m.Hxu = Eigen::MatrixXd::Zero(nx, nu);
  m.Huu = Eigen::MatrixXd::Zero(nu, nu);
  m.gx = Eigen::VectorXd::Zero(nx);
  m.gu = Eigen::VectorXd::Zero(nu);
  m.c = 0.0;
  return m;
}

QuadraticModel& QuadraticModel::operator+=(const QuadraticModel& other) {
  Hxx += other.Hxx;
  Hxu += other.Hxu;
  Huu += other.Huu;
  gx += other.gx;
  gu += other.gu;
  c += other.c;
  return *this;
}

QuadraticModel& QuadraticModel::operator*=(double s) {
  Hxx *= s;
  Hxu *= s;
  Huu *= s;
  gx *= s;
  gu *= s;
  c *= s;
  return *this;
}

double stage_cost(const AugmentedState& x, const ControlInput& u,
                  const AugmentedState& ref_point,
                  const std::vector<Eigen::Vector2d>& obstacles,
                  const CostWeights& w) {
  double cost = 0.0;
  cost += w.w_pos * ((x.base.px - ref_point.base.px) *
                         (x.base.px - ref_point.base.px) +
                     (x.base.py - ref_point.base.py) *
                         (x.base.py - ref_point.base.py));
  const double dth = x.base.theta - ref_point.base.theta;
  cost += w.w_heading * dth * dth;
  const double dv = x.base.v - ref_point.base.v;
  cost += w.w_speed * dv * dv;

  cost += w.w_a * u.a * u.a + w.w_delta * u.delta * u.delta;

  const double ra = (u.a - x.prev_control.a) / w.dt;
  const double rd = (u.delta - x.prev_control.delta) / w.dt;
  cost += w.w_da * ra * ra + w.w_ddelta * rd * rd;

  if (!obstacles.empty()) {
    const Eigen::Vector2d ego = ego_center(x, w.center_offset);
    for (const auto& obs : obstacles) {
      const double d = (ego - obs).norm();
      if (d < w.d_prox) {
        cost += w.w_saf * (d - w.d_prox) * (d - w.d_prox);
      }
    }
  }
  return cost;
}

double terminal_cost(const AugmentedState& x, const AugmentedState& ref_point,
                     const CostWeights& w) {
  double cost = 0.0;
  cost += w.w_pos * ((x.base.px - ref_point.base.px) *
                         (x.base.px - ref_point.base.px) +
                     (x.base.py - ref_point.base.py) *
                         (x.base.py - ref_point.base.py));
  const double dth = x.base.theta - ref_point.base.theta;
  cost += w.w_heading * dth * dth;
  const double dv = x.base.v - ref_point.base.v;
  cost += w.w_speed * dv * dv;
  return cost;
}

// Residual convention: cost = sum_k r_k^2 with the weights folded into the
// residuals as square roots, so grad = 2 J'r and the Gauss-Newton Hessian
// 2 J'J is PSD by construction.
QuadraticModel quadratize(const AugmentedState& x, const ControlInput& u,
                          const AugmentedState& ref_point,
                          const std::vector<Eigen::Vector2d>& obstacles,
                          const CostWeights& w) {
  const int n_res = 8 + static_cast<int>(obstacles.size());
  Eigen::VectorXd r = Eigen::VectorXd::Zero(n_res);
  Eigen::MatrixXd Jx = Eigen::MatrixXd::Zero(n_res, kStateDim);
  Eigen::MatrixXd Ju = Eigen::MatrixXd::Zero(n_res, kInputDim);

  const double sw_pos = std::sqrt(w.w_pos);
  const double sw_heading = std::sqrt(w.w_heading);
  const double sw_speed = std::sqrt(w.w_speed);
  const double sw_a = std::sqrt(w.w_a);
  const double sw_delta = std::sqrt(w.w_delta);
  const double sw_da = std::sqrt(w.w_da);
  const double sw_ddelta = std::sqrt(w.w_ddelta);
  const double sw_saf = std::sqrt(w.w_saf);

  r[0] = sw_pos * (x.base.px - ref_point.base.px);
  Jx(0, 0) = sw_pos;
  r[1] = sw_pos * (x.base.py - ref_point.base.py);
  Jx(1, 1) = sw_pos;
  r[2] = sw_heading * (x.base.theta - ref_point.base.theta);
  Jx(2, 2) = sw_heading;
  r[3] = sw_speed * (x.base.v - ref_point.base.v);
  Jx(3, 3) = sw_speed;

  r[4] = sw_a * u.a;
  Ju(4, 0) = sw_a;
  r[5] = sw_delta * u.delta;
  Ju(5, 1) = sw_delta;

  r[6] = sw_da * (u.a - x.prev_control.a) / w.dt;
  Ju(6, 0) = sw_da / w.dt;
  Jx(6, 4) = -sw_da / w.dt;
  r[7] = sw_ddelta * (u.delta - x.prev_control.delta) / w.dt;
  Ju(7, 1) = sw_ddelta / w.dt;
  Jx(7, 5) = -sw_ddelta / w.dt;

  if (!obstacles.empty()) {
    const double cth = std::cos(x.base.theta);
    const double sth = std::sin(x.base.theta);
    const Eigen::Vector2d ego(x.base.px + w.center_offset * cth,
                              x.base.py + w.center_offset * sth);
    for (std::size_t k = 0; k < obstacles.size(); ++k) {
      const Eigen::Vector2d diff = ego - obstacles[k];
      const double d = std::max(diff.norm(), 1e-9);
      if (d >= w.d_prox) {
        continue;  // residual and its Jacobian are exactly zero here
      }
      const int row = 8 + static_cast<int>(k);
      r[row] = sw_saf * (w.d_prox - d);
      const Eigen::Vector2d dir = diff / d;
      Jx(row, 0) = -sw_saf * dir.x();
      Jx(row, 1) = -sw_saf * dir.y();
      Jx(row, 2) = -sw_saf * w.center_offset * (-sth * dir.x() + cth * dir.y());
    }
  }

  QuadraticModel m;
  m.Hxx = 2.0 * Jx.transpose() * Jx;
  m.Hxu = 2.0 * Jx.transpose() * Ju;
  m.Huu = 2.0 * Ju.transpose() * Ju;
  m.gx = 2.0 * Jx.transpose() * r;
  m.gu = 2.0 * Ju.transpose() * r;
  m.c = r.squaredNorm();
  return m;
}

QuadraticModel quadratize_terminal(const AugmentedState& x,
                                   const AugmentedState& ref_point,
                                   const CostWeights& w) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(4);
  Eigen::MatrixXd Jx = Eigen::MatrixXd::Zero(4, kStateDim);

  const double sw_pos = std::sqrt(w.w_pos);
  const double sw_heading = std::sqrt(w.w_heading);
  const double sw_speed = std::sqrt(w.w_speed);

  r[0] = sw_pos * (x.base.px - ref_point.base.px);
  Jx(0, 0) = sw_pos;
  r[1] = sw_pos * (x.base.py - ref_point.base.py);
  Jx(1, 1) = sw_pos;
  r[2] = sw_heading * (x.base.theta - ref_point.base.theta);
  Jx(2, 2) = sw_heading;
  r[3] = sw_speed * (x.base.v - ref_point.base.v);
  Jx(3, 3) = sw_speed;

  QuadraticModel m = QuadraticModel::zero(kStateDim, kInputDim);
  m.Hxx = 2.0 * Jx.transpose() * Jx;
  m.gx = 2.0 * Jx.transpose() * r;
  m.c = r.squaredNorm();
  return m;
}

}  // namespace rbmpc
