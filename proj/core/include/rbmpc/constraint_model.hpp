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
#include <optional>
#include <vector>

#include "rbmpc/types.hpp"
#include "rbmpc/vehicle_model.hpp"

namespace rbmpc {

/// Disc over-approximation of a rectangular footprint: circles of a common
/// radius placed at longitudinal offsets from the reference point.
struct FootprintCircles {
  double radius{0.0};
  std::vector<double> offsets;

  /// Circle centers in world frame for a pose (position of the reference
  /// point plus heading).
  std::vector<Eigen::Vector2d> centers(const Eigen::Vector2d& position,
                                       double heading) const;
};

/// Equally spaced circles covering a length x width rectangle whose rear
/// edge sits rear_overhang behind the reference point. Throws
/// std::invalid_argument if the boundary sampling check finds an uncovered
/// rectangle point (cannot happen for the computed radius; guards custom
/// radii passed through check_covers).
FootprintCircles make_footprint(int n_circles, double length, double width,
                                double rear_overhang);

/// Boundary-sampling cover check used at construction.
bool covers_rectangle(const FootprintCircles& circles, double length,
                      double width, double rear_overhang);

/// Predicted pose of a surrounding vehicle at one step; position is the
/// footprint center.
struct ObstaclePrediction {
  Eigen::Vector2d position{0.0, 0.0};
  double heading{0.0};
};

/// Lateral corridor about a reference pose: |lateral offset| <= half_width
/// measured along the normal of the reference heading.
struct Corridor {
  Eigen::Vector2d ref_position{0.0, 0.0};
  double ref_heading{0.0};
  double half_width{2.0};
};

/// Everything needed to evaluate the constraint vector at one tree node.
/// Rows are ordered [input bounds; rate bounds; speed bounds; collision
/// pairs; corridor]; rows with non-finite bounds are dropped.
struct ConstraintContext {
  BicycleParams params;
  bool with_input{true};  // false at terminal nodes
  FootprintCircles ego_circles;
  double obstacle_radius{0.0};
  std::vector<double> obstacle_offsets;
  std::vector<ObstaclePrediction> obstacles;
  std::optional<Corridor> corridor;

  int num_rows() const;
};

/// h(x, u) <= 0 stacked per the ordering above; negative means satisfied.
Eigen::VectorXd eval_constraints(const AugmentedState& x,
                                 const ControlInput& u,
                                 const ConstraintContext& ctx);

/// Jacobians of eval_constraints with respect to the augmented state and
/// the input, matching its row ordering.
void constraint_jacobians(const AugmentedState& x, const ControlInput& u,
                          const ConstraintContext& ctx, Eigen::MatrixXd& Jx,
                          Eigen::MatrixXd& Ju);

/// Diagonal of the active-set penalty selector: entry m is 0 iff
/// h_m < 0 and lambda_m = 0, otherwise mu.
Eigen::VectorXd active_penalty_diag(const Eigen::VectorXd& h,
                                    const Eigen::VectorXd& lambda, double mu);

/// lambda'h + 1/2 h'I_mu h for one node.
double augmented_cost(const Eigen::VectorXd& h, const Eigen::VectorXd& lambda,
                      double mu);

struct AugmentedTerms {
  double cost{0.0};
  Eigen::VectorXd gx;
  Eigen::VectorXd gu;
  Eigen::MatrixXd Hxx;
  Eigen::MatrixXd Hxu;
  Eigen::MatrixXd Huu;
};

/// Augmented Lagrangian contribution to a node's Q-function: cost
/// lambda'h + 1/2 h'I_mu h, gradient J'(lambda + I_mu h), Gauss-Newton
/// Hessian J'I_mu J.
AugmentedTerms augmented_terms(const Eigen::VectorXd& h,
                               const Eigen::VectorXd& lambda, double mu,
                               const Eigen::MatrixXd& Jx,
                               const Eigen::MatrixXd& Ju);

/// Per-node multipliers and the shared penalty weight. Node order is owned
/// by the solver; h mirrors the latest constraint evaluation.
struct ConstraintState {
  std::vector<Eigen::VectorXd> lambda;
  std::vector<Eigen::VectorXd> h;
  double mu{1.0};
};

/// First-order multiplier update lambda <- max(0, lambda + mu h) per node,
/// then the geometric penalty schedule mu <- min(mu * mu_scale, mu_max).
void update_multipliers(ConstraintState& state, double mu_scale,
                        double mu_max);

}  // namespace rbmpc
