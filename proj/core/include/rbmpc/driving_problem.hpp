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

#include <optional>
#include <vector>

#include "rbmpc/constraint_model.hpp"
#include "rbmpc/cost_model.hpp"
#include "rbmpc/ilqr_tree_solver.hpp"
#include "rbmpc/tree_ocp.hpp"
#include "rbmpc/types.hpp"
#include "rbmpc/vehicle_model.hpp"

namespace rbmpc {

/// Per-node planning context: tracking reference, predicted surrounding
/// vehicles for this node's behavior mode, and the corridor half-planes.
struct NodeContext {
  AugmentedState ref;
  std::vector<ObstaclePrediction> obstacles;
  std::optional<Corridor> corridor;
};

/// Branch-MPC optimal control problem for the kinematic bicycle: tracking,
/// comfort and safety costs with input/rate/speed bounds, linked-circle
/// collision avoidance and corridor constraints per node.
class DrivingTreeProblem final : public TreeOcp {
 public:
  DrivingTreeProblem(BicycleParams params, CostWeights weights,
                     FootprintCircles ego_circles,
                     FootprintCircles obstacle_circles,
                     AugmentedState x0, int num_branches, int split_step,
                     int horizon);

  /// Fills node data; shared nodes use t in [0, split_step), branch nodes
  /// t in [split_step, horizon], the last being the terminal node.
  void set_shared_node(int t, NodeContext ctx);
  void set_branch_node(int branch, int t, NodeContext ctx);

  const BicycleParams& params() const { return params_; }
  const CostWeights& weights() const { return weights_; }
  const NodeContext& node_context(const NodeRef& node) const;

  // TreeOcp interface
  int state_dim() const override { return kStateDim; }
  int input_dim() const override { return kInputDim; }
  int num_branches() const override { return num_branches_; }
  int split_step() const override { return split_step_; }
  int horizon() const override { return horizon_; }
  Eigen::VectorXd initial_state() const override { return to_vector(x0_); }

  Eigen::VectorXd dynamics(const NodeRef& node, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& u) const override;
  void linearize_dynamics(const NodeRef& node, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& u, Eigen::MatrixXd& A,
                          Eigen::MatrixXd& B) const override;

  double cost(const NodeRef& node, const Eigen::VectorXd& x,
              const Eigen::VectorXd& u) const override;
  QuadraticModel quadratize_cost(const NodeRef& node, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& u) const override;
  double terminal(int branch, const Eigen::VectorXd& x) const override;
  QuadraticModel quadratize_terminal_cost(
      int branch, const Eigen::VectorXd& x) const override;

  int num_constraints(const NodeRef& node) const override;
  Eigen::VectorXd constraints(const NodeRef& node, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& u) const override;
  void constraint_jacobians(const NodeRef& node, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& u, Eigen::MatrixXd& Jx,
                            Eigen::MatrixXd& Ju) const override;

 private:
  struct NodeData {
    NodeContext ctx;
    ConstraintContext constraint_ctx;
    std::vector<Eigen::Vector2d> obstacle_centers;  // for the safety cost
  };

  const NodeData& node_data(const NodeRef& node) const;
  NodeData make_node_data(NodeContext ctx, bool with_input) const;

  BicycleParams params_;
  CostWeights weights_;
  FootprintCircles ego_circles_;
  FootprintCircles obstacle_circles_;
  AugmentedState x0_;
  int num_branches_;
  int split_step_;
  int horizon_;

  std::vector<NodeData> shared_nodes_;                 // [0, Ts)
  std::vector<std::vector<NodeData>> branch_nodes_;    // [Ts, T] per branch
};

VecTree to_vec_tree(const TrajectoryTree& tree);
TrajectoryTree to_trajectory_tree(const VecTree& tree);

/// Domain-level wrapper around solve_tree: runs the risk-aware
/// augmented-Lagrangian solve from the given initial input tree and maps
/// the result back onto domain types.
SolveResult solve_branch_mpc(const DrivingTreeProblem& problem,
                             const TrajectoryTree& initial_guess,
                             const ProbabilityVector& p,
                             const SolverSettings& settings,
                             TreeSolveResult* details = nullptr);

}  // namespace rbmpc
