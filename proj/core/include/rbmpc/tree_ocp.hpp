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

#include "rbmpc/cost_model.hpp"

namespace rbmpc {

/// Address of a tree node: branch < 0 selects the shared segment
/// (t in [0, split_step)); branch i >= 0 selects branch stages
/// (t in [split_step, horizon)) and the branch terminal (t = horizon).
struct NodeRef {
  int branch{-1};
  int t{0};
};

/// Optimal control problem on a trajectory tree: one shared input segment
/// followed by independent branch tails. Costs are per node and unweighted;
/// the solver applies the branch probability weights itself.
class TreeOcp {
 public:
  virtual ~TreeOcp() = default;

  virtual int state_dim() const = 0;
  virtual int input_dim() const = 0;
  virtual int num_branches() const = 0;
  virtual int split_step() const = 0;
  virtual int horizon() const = 0;
  virtual Eigen::VectorXd initial_state() const = 0;

  virtual Eigen::VectorXd dynamics(const NodeRef& node,
                                   const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& u) const = 0;
  virtual void linearize_dynamics(const NodeRef& node,
                                  const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& u,
                                  Eigen::MatrixXd& A,
                                  Eigen::MatrixXd& B) const = 0;

  virtual double cost(const NodeRef& node, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& u) const = 0;
  virtual QuadraticModel quadratize_cost(const NodeRef& node,
                                         const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& u) const = 0;
  virtual double terminal(int branch, const Eigen::VectorXd& x) const = 0;
  virtual QuadraticModel quadratize_terminal_cost(
      int branch, const Eigen::VectorXd& x) const = 0;

  /// Inequality constraints h <= 0 at a node; terminal nodes receive a zero
  /// input vector. Default: unconstrained.
  virtual int num_constraints(const NodeRef& node) const {
    (void)node;
    return 0;
  }
  virtual Eigen::VectorXd constraints(const NodeRef& node,
                                      const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& u) const {
    (void)node;
    (void)x;
    (void)u;
    return Eigen::VectorXd();
  }
  virtual void constraint_jacobians(const NodeRef& node,
                                    const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& u,
                                    Eigen::MatrixXd& Jx,
                                    Eigen::MatrixXd& Ju) const {
    (void)node;
    (void)x;
    (void)u;
    Jx.resize(0, state_dim());
    Ju.resize(0, input_dim());
  }
};

/// Trajectory tree over plain vectors, the solver's working representation.
struct VecTree {
  std::vector<Eigen::VectorXd> shared_inputs;                // t in [0, Ts)
  std::vector<Eigen::VectorXd> shared_states;                // t in [0, Ts]
  std::vector<std::vector<Eigen::VectorXd>> branch_inputs;   // t in [Ts, T)
  std::vector<std::vector<Eigen::VectorXd>> branch_states;   // t in (Ts, T]

  int num_branches() const { return static_cast<int>(branch_inputs.size()); }
  int split_step() const { return static_cast<int>(shared_inputs.size()); }
  int horizon() const {
    return split_step() +
           (branch_inputs.empty()
                ? 0
                : static_cast<int>(branch_inputs[0].size()));
  }

  const Eigen::VectorXd& state(int branch, int t) const {
    return t <= split_step() ? shared_states[t]
                             : branch_states[branch][t - split_step() - 1];
  }
  const Eigen::VectorXd& input(int branch, int t) const {
    return t < split_step() ? shared_inputs[t]
                            : branch_inputs[branch][t - split_step()];
  }
};

/// Nonlinear rollout of the input tree in `inputs` from the problem's
/// initial state; states in `inputs` are ignored.
VecTree rollout_tree(const TreeOcp& problem, const VecTree& inputs);

/// Flat node enumeration used for multiplier bookkeeping: shared stages
/// first, then per branch its stages followed by the terminal node.
int tree_node_count(int num_branches, int split_step, int horizon);
int tree_node_index(int num_branches, int split_step, int horizon, int branch,
                    int t);

}  // namespace rbmpc
