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

#include "rbmpc/types.hpp"

namespace rbmpc {

/// Kinematic bicycle parameters and box limits on physical quantities.
/// Bounds may be infinite; infinite bounds produce no constraint rows.
struct BicycleParams {
  double wheelbase{2.7};  // [m]
  double dt{0.1};         // [s]

  double v_min{0.0};
  double v_max{15.0};
  double a_min{-4.0};
  double a_max{3.0};
  double delta_min{-0.6};
  double delta_max{0.6};
  double a_rate_min{-10.0};     // [m/s^3]
  double a_rate_max{10.0};
  double delta_rate_min{-0.8};  // [rad/s]
  double delta_rate_max{0.8};

  void validate() const;
};

/// One explicit-Euler step of the augmented-state kinematic bicycle.
/// No saturation is applied here; limits are handled as constraints.
AugmentedState step(const AugmentedState& x, const ControlInput& u,
                    const BicycleParams& params);

/// Analytic Jacobians of step() at (x, u): A = d(step)/dx (6x6),
/// B = d(step)/du (6x2). The prev_control rows of A are zero and of B are
/// the identity.
void linearize(const AugmentedState& x, const ControlInput& u,
               const BicycleParams& params, Eigen::MatrixXd& A,
               Eigen::MatrixXd& B);

}  // namespace rbmpc
