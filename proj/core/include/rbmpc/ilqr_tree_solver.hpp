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

#include "rbmpc/constraint_model.hpp"
#include "rbmpc/risk_ascent.hpp"
#include "rbmpc/tree_ocp.hpp"
#include "rbmpc/types.hpp"

namespace rbmpc {

/// Local models at one stage node: cost expansion, dynamics linearization,
/// and constraint values with their Jacobians.
struct StageModel {
  QuadraticModel cost;
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::VectorXd h;
  Eigen::MatrixXd hJx;
  Eigen::MatrixXd hJu;
};

struct TerminalModel {
  QuadraticModel cost;
  Eigen::VectorXd h;
  Eigen::MatrixXd hJx;
  Eigen::MatrixXd hJu;
};

struct TreeModels {
  std::vector<StageModel> shared;
  std::vector<std::vector<StageModel>> branch;
  std::vector<TerminalModel> terminal;
};

/// Quadratizes costs, linearizes dynamics and evaluates constraints along
/// the current tree. Branch segments may be expanded on worker threads.
TreeModels build_models(const TreeOcp& problem, const VecTree& tree,
                        bool parallel_branches = false);

/// Affine control law per node plus the expected-decrease model of the
/// line search: delta(s) = s * exp_linear + s^2/2 * exp_quadratic.
struct FeedbackLaw {
  std::vector<Eigen::MatrixXd> shared_K;
  std::vector<Eigen::VectorXd> shared_d;
  std::vector<std::vector<Eigen::MatrixXd>> branch_K;
  std::vector<std::vector<Eigen::VectorXd>> branch_d;
  double exp_linear{0.0};
  double exp_quadratic{0.0};

  double expected_change(double s) const {
    return s * exp_linear + 0.5 * s * s * exp_quadratic;
  }
};

/// Quadratic value model V(x + dx) = v0 + vx'dx + 1/2 dx'Vxx dx.
struct ValueModel {
  Eigen::MatrixXd Vxx;
  Eigen::VectorXd vx;
  double v0{0.0};
};

struct BackwardPassResult {
  bool ok{false};  // false: a Quu + reg I block was not positive definite
  FeedbackLaw law;
  /// Value models at shared states 0..Ts; entry Ts is the branching-node
  /// model, the index-ordered sum of the per-branch models.
  std::vector<ValueModel> shared_values;
  /// Per branch, value models at states Ts..T (entry 0 is pre-sum).
  std::vector<std::vector<ValueModel>> branch_values;
};

/// Riccati sweep from the leaves to the root. Branch cost models are scaled
/// by their probability weight q_i; augmented Lagrangian terms are added
/// unweighted (constraints bind regardless of branch probability). Branch
/// recursions are independent and may run on worker threads; the branching
/// node always sums branch value models in index order.
BackwardPassResult backward_pass(const TreeModels& models,
                                 const Eigen::VectorXd& q,
                                 const ConstraintState& constraints,
                                 double reg,
                                 bool parallel_branches = false);

/// Objective decomposition at a tree: shared stage cost, unweighted branch
/// costs (stages + terminal), augmented Lagrangian total and the raw
/// constraint values per node.
struct TreeCost {
  double shared_cost{0.0};
  Eigen::VectorXd branch_costs;
  double al_cost{0.0};
  double max_violation{0.0};
  std::vector<Eigen::VectorXd> h_per_node;

  double total(const Eigen::VectorXd& q) const {
    return shared_cost + q.dot(branch_costs) + al_cost;
  }
};

TreeCost eval_tree_cost(const TreeOcp& problem, const VecTree& tree,
                        const ConstraintState& constraints);

struct ForwardPassResult {
  VecTree tree;
  TreeCost cost;
  double step_size{0.0};
  bool accepted{false};
  int trials{0};
};

/// Nonlinear rollout of u = u_old + s d + K (x - x_old) under a backtracking
/// line search on the augmented-Lagrangian total cost (probability vector q
/// held fixed). Non-finite rollouts count as failed trials.
ForwardPassResult forward_pass(const TreeOcp& problem, const VecTree& tree,
                               const TreeModels& models,
                               const FeedbackLaw& law,
                               const Eigen::VectorXd& q,
                               const ConstraintState& constraints,
                               double current_total,
                               const SolverSettings& settings);

/// Zero multipliers sized per node from the problem's constraint counts.
ConstraintState init_constraint_state(const TreeOcp& problem, double mu_init);

struct InnerLoopStats {
  int iterations{0};
  int accepted_steps{0};
  int line_search_failures{0};
  bool converged{false};
  std::vector<double> cost_history;      // AL total after each accepted step
  std::vector<double> q_change_history;  // inf-norm q move per accepted step
  std::vector<double> descent_history;   // AL cost drop at fixed q per step
  std::vector<Eigen::VectorXd> q_history;            // q after each step
  std::vector<Eigen::VectorXd> branch_cost_history;  // J at each step
};

struct InnerLoopResult {
  VecTree tree;
  ProbabilityVector q;
  TreeCost cost;
  InnerLoopStats stats;
};

/// Inner min-max loop: repeat (quadratize, backward pass, forward pass with
/// line search); on line-search failure grow the Hessian regularization,
/// otherwise shrink it and take one regularized projected-gradient ascent
/// step on q with weight rho0/(k+1). Stops when both the cost change of an
/// accepted step and the q move fall below their tolerances.
InnerLoopResult minmax_ilqr_tree(const TreeOcp& problem, const VecTree& tree,
                                 const ProbabilityVector& q_init,
                                 const AmbiguitySet& set,
                                 ConstraintState& constraints,
                                 const SolverSettings& settings,
                                 double gamma_eff);

struct TreeSolveResult {
  VecTree tree;
  ProbabilityVector q;
  bool converged{false};
  int outer_iters{0};
  int total_inner_iters{0};
  double final_cost{0.0};  // shared + q-weighted branch costs, no AL terms
  double max_constraint_violation{0.0};
  double solve_time{0.0};
  double shared_cost{0.0};
  Eigen::VectorXd branch_costs;  // unweighted, at the returned tree
  InnerLoopStats last_inner;
};

/// Outer augmented-Lagrangian loop around the inner min-max iteration with
/// first-order multiplier updates and the geometric penalty schedule.
TreeSolveResult solve_tree(const TreeOcp& problem, const VecTree& u_init,
                           const ProbabilityVector& p,
                           const SolverSettings& settings);

}  // namespace rbmpc
