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

#include "rbmpc/types.hpp"

#include <cmath>
#include <stdexcept>

namespace rbmpc {

Eigen::VectorXd to_vector(const AugmentedState& x) {
  Eigen::VectorXd v(kStateDim);
  v << x.base.px, x.base.py, x.base.theta, x.base.v, x.prev_control.a,
      x.prev_control.delta;
  return v;
}

AugmentedState state_from_vector(const Eigen::VectorXd& v) {
  AugmentedState x;
  x.base.px = v[0];
  x.base.py = v[1];
  x.base.theta = v[2];
  x.base.v = v[3];
  x.prev_control.a = v[4];
  x.prev_control.delta = v[5];
  return x;
}

Eigen::Vector2d to_vector(const ControlInput& u) {
  return Eigen::Vector2d(u.a, u.delta);
}

ControlInput input_from_vector(const Eigen::Vector2d& v) {
  return ControlInput{v[0], v[1]};
}

ProbabilityVector::ProbabilityVector(Eigen::VectorXd values)
    : values_(std::move(values)) {
  if (values_.size() == 0) {
    throw std::invalid_argument("ProbabilityVector: empty");
  }
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    if (!(values_[i] >= 0.0)) {
      throw std::invalid_argument("ProbabilityVector: negative entry");
    }
  }
  if (std::abs(values_.sum() - 1.0) > kSumTolerance) {
    throw std::invalid_argument("ProbabilityVector: entries do not sum to 1");
  }
}

ProbabilityVector ProbabilityVector::uniform(int d) {
  return ProbabilityVector(Eigen::VectorXd::Constant(d, 1.0 / d));
}

TrajectoryTree::TrajectoryTree(
    std::vector<ControlInput> shared_inputs,
    std::vector<std::vector<ControlInput>> branch_inputs,
    std::vector<AugmentedState> shared_states,
    std::vector<std::vector<AugmentedState>> branch_states)
    : shared_inputs_(std::move(shared_inputs)),
      branch_inputs_(std::move(branch_inputs)),
      shared_states_(std::move(shared_states)),
      branch_states_(std::move(branch_states)) {}

const AugmentedState& TrajectoryTree::state(int branch, int t) const {
  if (t <= split_step()) {
    return shared_states_[t];
  }
  return branch_states_[branch][t - split_step() - 1];
}

const ControlInput& TrajectoryTree::input(int branch, int t) const {
  if (t < split_step()) {
    return shared_inputs_[t];
  }
  return branch_inputs_[branch][t - split_step()];
}

AugmentedState& TrajectoryTree::mutable_state(int branch, int t) {
  if (t <= split_step()) {
    return shared_states_[t];
  }
  return branch_states_[branch][t - split_step() - 1];
}

ControlInput& TrajectoryTree::mutable_input(int branch, int t) {
  if (t < split_step()) {
    return shared_inputs_[t];
  }
  return branch_inputs_[branch][t - split_step()];
}

TrajectoryTree build_tree(
    const AugmentedState& x0, const std::vector<ControlInput>& shared,
    const std::vector<std::vector<ControlInput>>& branches,
    const DynamicsFn& dynamics) {
  if (shared.empty()) {
    throw std::invalid_argument("build_tree: shared segment is empty");
  }
  if (branches.empty()) {
    throw std::invalid_argument("build_tree: no branches");
  }
  const std::size_t tail_len = branches.front().size();
  if (tail_len == 0) {
    throw std::invalid_argument("build_tree: empty branch segment");
  }
  for (const auto& b : branches) {
    if (b.size() != tail_len) {
      throw std::invalid_argument("build_tree: ragged branch lengths");
    }
  }

  std::vector<AugmentedState> shared_states;
  shared_states.reserve(shared.size() + 1);
  shared_states.push_back(x0);
  for (const auto& u : shared) {
    shared_states.push_back(dynamics(shared_states.back(), u));
  }

  std::vector<std::vector<AugmentedState>> branch_states(branches.size());
  for (std::size_t i = 0; i < branches.size(); ++i) {
    branch_states[i].reserve(tail_len);
    AugmentedState x = shared_states.back();
    for (const auto& u : branches[i]) {
      x = dynamics(x, u);
      branch_states[i].push_back(x);
    }
  }

  return TrajectoryTree(shared, branches, std::move(shared_states),
                        std::move(branch_states));
}

void SolverSettings::validate() const {
  auto fail = [](const char* what) {
    throw std::invalid_argument(std::string("SolverSettings: ") + what);
  };
  if (max_outer_iters < 1 || max_inner_iters < 1) fail("iteration limits");
  if (!(cost_tolerance > 0.0)) fail("cost_tolerance");
  if (!(constraint_tolerance > 0.0)) fail("constraint_tolerance");
  if (!(gradient_tolerance > 0.0)) fail("gradient_tolerance");
  if (!(mu_init > 0.0)) fail("mu_init");
  if (!(mu_scale > 1.0)) fail("mu_scale");
  if (!(mu_max >= mu_init)) fail("mu_max");
  if (!(line_search_beta > 0.0 && line_search_beta < 1.0)) {
    fail("line_search_beta");
  }
  if (!(line_search_c > 0.0 && line_search_c < 1.0)) fail("line_search_c");
  if (line_search_max_steps < 1) fail("line_search_max_steps");
  if (!(hessian_reg_init >= 0.0)) fail("hessian_reg_init");
  if (!(hessian_reg_scale > 1.0)) fail("hessian_reg_scale");
  if (!(hessian_reg_max > 0.0)) fail("hessian_reg_max");
  if (!(gamma > 0.0)) fail("gamma");
  if (!(rho0 >= 0.0)) fail("rho0");
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail("alpha");
}

}  // namespace rbmpc
