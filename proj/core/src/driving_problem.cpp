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

#include "rbmpc/driving_problem.hpp"

#include <stdexcept>

namespace rbmpc {

DrivingTreeProblem::DrivingTreeProblem(BicycleParams params,
                                       CostWeights weights,
                                       FootprintCircles ego_circles,
                                       FootprintCircles obstacle_circles,
                                       AugmentedState x0, int num_branches,
                                       int split_step, int horizon)
    : params_(params),
      weights_(weights),
      ego_circles_(std::move(ego_circles)),
      obstacle_circles_(std::move(obstacle_circles)),
      x0_(x0),
      num_branches_(num_branches),
      split_step_(split_step),
      horizon_(horizon) {
  params_.validate();
  weights_.validate();
  if (num_branches_ < 1 || split_step_ < 1 || horizon_ <= split_step_) {
    throw std::invalid_argument("DrivingTreeProblem: bad tree shape");
  }
  NodeData blank = make_node_data(NodeContext{}, true);
  shared_nodes_.assign(split_step_, blank);
  branch_nodes_.assign(num_branches_,
                       std::vector<NodeData>(horizon_ - split_step_ + 1, blank));
  for (auto& nodes : branch_nodes_) {
    nodes.back() = make_node_data(NodeContext{}, false);
  }
}

DrivingTreeProblem::NodeData DrivingTreeProblem::make_node_data(
    NodeContext ctx, bool with_input) const {
  NodeData data;
  data.constraint_ctx.params = params_;
  data.constraint_ctx.with_input = with_input;
  data.constraint_ctx.ego_circles = ego_circles_;
  data.constraint_ctx.obstacle_radius = obstacle_circles_.radius;
  data.constraint_ctx.obstacle_offsets = obstacle_circles_.offsets;
  data.constraint_ctx.obstacles = ctx.obstacles;
  data.constraint_ctx.corridor = ctx.corridor;
  data.obstacle_centers.reserve(ctx.obstacles.size());
  for (const auto& obs : ctx.obstacles) {
    data.obstacle_centers.push_back(obs.position);
  }
  data.ctx = std::move(ctx);
  return data;
}

void DrivingTreeProblem::set_shared_node(int t, NodeContext ctx) {
  shared_nodes_.at(t) = make_node_data(std::move(ctx), true);
}

void DrivingTreeProblem::set_branch_node(int branch, int t, NodeContext ctx) {
  const bool with_input = t < horizon_;
  branch_nodes_.at(branch).at(t - split_step_) =
      make_node_data(std::move(ctx), with_input);
}

const DrivingTreeProblem::NodeData& DrivingTreeProblem::node_data(
    const NodeRef& node) const {
  if (node.branch < 0) {
    return shared_nodes_[node.t];
  }
  return branch_nodes_[node.branch][node.t - split_step_];
}

const NodeContext& DrivingTreeProblem::node_context(
    const NodeRef& node) const {
  return node_data(node).ctx;
}

Eigen::VectorXd DrivingTreeProblem::dynamics(const NodeRef& node,
                                             const Eigen::VectorXd& x,
                                             const Eigen::VectorXd& u) const {
  (void)node;
  return to_vector(
      step(state_from_vector(x), input_from_vector(u), params_));
}

void DrivingTreeProblem::linearize_dynamics(const NodeRef& node,
                                            const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& u,
                                            Eigen::MatrixXd& A,
                                            Eigen::MatrixXd& B) const {
  (void)node;
  linearize(state_from_vector(x), input_from_vector(u), params_, A, B);
}

double DrivingTreeProblem::cost(const NodeRef& node, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& u) const {
  const NodeData& data = node_data(node);
  return stage_cost(state_from_vector(x), input_from_vector(u), data.ctx.ref,
                    data.obstacle_centers, weights_);
}

QuadraticModel DrivingTreeProblem::quadratize_cost(
    const NodeRef& node, const Eigen::VectorXd& x,
    const Eigen::VectorXd& u) const {
  const NodeData& data = node_data(node);
  return quadratize(state_from_vector(x), input_from_vector(u), data.ctx.ref,
                    data.obstacle_centers, weights_);
}

double DrivingTreeProblem::terminal(int branch,
                                    const Eigen::VectorXd& x) const {
  const NodeData& data = node_data(NodeRef{branch, horizon_});
  return terminal_cost(state_from_vector(x), data.ctx.ref, weights_);
}

QuadraticModel DrivingTreeProblem::quadratize_terminal_cost(
    int branch, const Eigen::VectorXd& x) const {
  const NodeData& data = node_data(NodeRef{branch, horizon_});
  return quadratize_terminal(state_from_vector(x), data.ctx.ref, weights_);
}

int DrivingTreeProblem::num_constraints(const NodeRef& node) const {
  return node_data(node).constraint_ctx.num_rows();
}

Eigen::VectorXd DrivingTreeProblem::constraints(
    const NodeRef& node, const Eigen::VectorXd& x,
    const Eigen::VectorXd& u) const {
  return eval_constraints(state_from_vector(x), input_from_vector(u),
                          node_data(node).constraint_ctx);
}

void DrivingTreeProblem::constraint_jacobians(const NodeRef& node,
                                              const Eigen::VectorXd& x,
                                              const Eigen::VectorXd& u,
                                              Eigen::MatrixXd& Jx,
                                              Eigen::MatrixXd& Ju) const {
  rbmpc::constraint_jacobians(state_from_vector(x), input_from_vector(u),
                              node_data(node).constraint_ctx, Jx, Ju);
}

VecTree to_vec_tree(const TrajectoryTree& tree) {
  VecTree out;
  out.shared_inputs.reserve(tree.shared_inputs().size());
  for (const auto& u : tree.shared_inputs()) {
    out.shared_inputs.push_back(to_vector(u));
  }
  out.shared_states.reserve(tree.shared_states().size());
  for (const auto& x : tree.shared_states()) {
    out.shared_states.push_back(to_vector(x));
  }
  out.branch_inputs.resize(tree.num_branches());
  out.branch_states.resize(tree.num_branches());
  for (int i = 0; i < tree.num_branches(); ++i) {
    for (const auto& u : tree.branch_inputs()[i]) {
      out.branch_inputs[i].push_back(to_vector(u));
    }
    for (const auto& x : tree.branch_states()[i]) {
      out.branch_states[i].push_back(to_vector(x));
    }
  }
  return out;
}

TrajectoryTree to_trajectory_tree(const VecTree& tree) {
  std::vector<ControlInput> shared_inputs;
  shared_inputs.reserve(tree.shared_inputs.size());
  for (const auto& u : tree.shared_inputs) {
    shared_inputs.push_back(input_from_vector(u));
  }
  std::vector<AugmentedState> shared_states;
  shared_states.reserve(tree.shared_states.size());
  for (const auto& x : tree.shared_states) {
    shared_states.push_back(state_from_vector(x));
  }
  std::vector<std::vector<ControlInput>> branch_inputs(tree.num_branches());
  std::vector<std::vector<AugmentedState>> branch_states(tree.num_branches());
  for (int i = 0; i < tree.num_branches(); ++i) {
    for (const auto& u : tree.branch_inputs[i]) {
      branch_inputs[i].push_back(input_from_vector(u));
    }
    for (const auto& x : tree.branch_states[i]) {
      branch_states[i].push_back(state_from_vector(x));
    }
  }
  return TrajectoryTree(std::move(shared_inputs), std::move(branch_inputs),
                        std::move(shared_states), std::move(branch_states));
}

SolveResult solve_branch_mpc(const DrivingTreeProblem& problem,
                             const TrajectoryTree& initial_guess,
                             const ProbabilityVector& p,
                             const SolverSettings& settings,
                             TreeSolveResult* details) {
  const TreeSolveResult raw =
      solve_tree(problem, to_vec_tree(initial_guess), p, settings);

  SolveResult result;
  result.tree = to_trajectory_tree(raw.tree);
  result.q_final = raw.q;
  result.converged = raw.converged;
  result.outer_iters = raw.outer_iters;
  result.total_inner_iters = raw.total_inner_iters;
  result.final_cost = raw.final_cost;
  result.max_constraint_violation = raw.max_constraint_violation;
  result.solve_time = raw.solve_time;
  if (details != nullptr) {
    *details = raw;
  }
  return result;
}

}  // namespace rbmpc
