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

#include "rbmpc/vehicle_model.hpp"

#include <cmath>
#include <stdexcept>

namespace rbmpc {

void BicycleParams::validate() const {
  if (!(wheelbase > 0.0)) {
    throw std::invalid_argument("BicycleParams: wheelbase must be positive");
  }
  if (!(dt > 0.0)) {
    throw std::invalid_argument("BicycleParams: dt must be positive");
  }
  if (!(v_min < v_max) || !(a_min < a_max) || !(delta_min < delta_max) ||
      !(a_rate_min < a_rate_max) || !(delta_rate_min < delta_rate_max)) {
    throw std::invalid_argument("BicycleParams: lower bound >= upper bound");
  }
}

AugmentedState step(const AugmentedState& x, const ControlInput& u,
                    const BicycleParams& params) {
  const double dt = params.dt;
  const double c = std::cos(x.base.theta);
  const double s = std::sin(x.base.theta);

  AugmentedState next;
  next.base.px = x.base.px + dt * x.base.v * c;
  next.base.py = x.base.py + dt * x.base.v * s;
  next.base.theta =
      x.base.theta + dt * x.base.v / params.wheelbase * std::tan(u.delta);
  next.base.v = x.base.v + dt * u.a;
  next.prev_control = u;
  return next;
}

void linearize(const AugmentedState& x, const ControlInput& u,
               const BicycleParams& params, Eigen::MatrixXd& A,
               Eigen::MatrixXd& B) {
  const double dt = params.dt;
  const double c = std::cos(x.base.theta);
  const double s = std::sin(x.base.theta);
  const double tan_d = std::tan(u.delta);
  const double sec2_d = 1.0 + tan_d * tan_d;

  A = Eigen::MatrixXd::Zero(kStateDim, kStateDim);
  B = Eigen::MatrixXd::Zero(kStateDim, kInputDim);

  A(0, 0) = 1.0;
  A(0, 2) = -dt * x.base.v * s;
  A(0, 3) = dt * c;
  A(1, 1) = 1.0;
  A(1, 2) = dt * x.base.v * c;
  A(1, 3) = dt * s;
  A(2, 2) = 1.0;
  A(2, 3) = dt * tan_d / params.wheelbase;
  A(3, 3) = 1.0;

  B(2, 1) = dt * x.base.v / params.wheelbase * sec2_d;
  B(3, 0) = dt;
  B(4, 0) = 1.0;
  B(5, 1) = 1.0;
}

}  // namespace rbmpc
