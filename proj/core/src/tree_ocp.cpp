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

#include "rbmpc/tree_ocp.hpp"

#include <stdexcept>

namespace rbmpc {

VecTree rollout_tree(const TreeOcp& problem, const VecTree& inputs) {
  const int ts = inputs.split_step();
  const int d = inputs.num_branches();
  if (ts < 1 || d < 1 || inputs.horizon() <= ts) {
    throw std::invalid_argument("rollout_tree: malformed input tree");
  }

  VecTree tree;
  tree.shared_inputs = inputs.shared_inputs;
  tree.branch_inputs = inputs.branch_inputs;

  tree.shared_states.reserve(ts + 1);
  tree.shared_states.push_back(problem.initial_state());
  for (int t = 0; t < ts; ++t) {
    tree.shared_states.push_back(problem.dynamics(
        NodeRef{-1, t}, tree.shared_states.back(), tree.shared_inputs[t]));
  }

  tree.branch_states.resize(d);
  for (int i = 0; i < d; ++i) {
    Eigen::VectorXd x = tree.shared_states.back();
    tree.branch_states[i].reserve(tree.branch_inputs[i].size());
    for (std::size_t j = 0; j < tree.branch_inputs[i].size(); ++j) {
      x = problem.dynamics(NodeRef{i, ts + static_cast<int>(j)}, x,
                           tree.branch_inputs[i][j]);
      tree.branch_states[i].push_back(x);
    }
  }
  return tree;
}

int tree_node_count(int num_branches, int split_step, int horizon) {
  return split_step + num_branches * (horizon - split_step + 1);
}

int tree_node_index(int num_branches, int split_step, int horizon, int branch,
                    int t) {
  (void)num_branches;
  if (branch < 0) {
    return t;
  }
  return split_step + branch * (horizon - split_step + 1) + (t - split_step);
}

}  // namespace rbmpc
