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

#pragma once

#include <Eigen/Core>
#include <vector>

#include "rbmpc/types.hpp"

namespace rbmpc {

struct CostWeights {
  double w_pos{0.5};       // [1/m^2]
  double w_heading{2.0};   // [1/rad^2]
  double w_speed{0.5};     // [s^2/m^2]
  double w_a{1.0};
  double w_delta{2.0};
  double w_da{0.02};       // on (a_t - a_{t-1})/dt
  double w_ddelta{0.05};   // on (delta_t - delta_{t-1})/dt
  double w_saf{2.0};       // [1/m^2]
  double d_prox{6.0};      // [m] proximity threshold for the safety term
  double center_offset{1.5};  // [m] ego center ahead of the rear axle
  double dt{0.1};          // [s] used by the input-rate terms

  void validate() const;
};

/// Second-order local model of a scalar function of (x, u):
///   m(dx, du) = c + gx'dx + gu'du
///             + 1/2 (dx'Hxx dx + 2 dx'Hxu du + du'Huu du)
/// Assembled Gauss-Newton style, so the stacked Hessian is PSD.
struct QuadraticModel {
  Eigen::MatrixXd Hxx;
  Eigen::MatrixXd Hxu;
  Eigen::MatrixXd Huu;
  Eigen::VectorXd gx;
  Eigen::VectorXd gu;
  double c{0.0};

  static QuadraticModel zero(int nx, int nu);
  QuadraticModel& operator+=(const QuadraticModel& other);
  QuadraticModel& operator*=(double s);
};

/// Tracking + comfort + safety stage cost. `obstacles` holds the predicted
/// center positions of the surrounding vehicles at this step for this
/// branch's behavior mode.
double stage_cost(const AugmentedState& x, const ControlInput& u,
                  const AugmentedState& ref_point,
                  const std::vector<Eigen::Vector2d>& obstacles,
                  const CostWeights& weights);

/// Tracking-only terminal cost.
double terminal_cost(const AugmentedState& x, const AugmentedState& ref_point,
                     const CostWeights& weights);

/// Gauss-Newton expansion of stage_cost about (x, u).
QuadraticModel quadratize(const AugmentedState& x, const ControlInput& u,
                          const AugmentedState& ref_point,
                          const std::vector<Eigen::Vector2d>& obstacles,
                          const CostWeights& weights);

/// Gauss-Newton expansion of terminal_cost; input blocks are zero.
QuadraticModel quadratize_terminal(const AugmentedState& x,
                                   const AugmentedState& ref_point,
                                   const CostWeights& weights);

}  // namespace rbmpc
