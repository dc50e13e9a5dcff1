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
#include <functional>
#include <vector>

namespace rbmpc {

/// Kinematic bicycle state, rear-axle reference point.
struct VehicleState {
  double px{0.0};     // [m]
  double py{0.0};     // [m]
  double theta{0.0};  // [rad], not wrapped
  double v{0.0};      // [m/s]
};

struct ControlInput {
  double a{0.0};      // [m/s^2]
  double delta{0.0};  // [rad]
};

/// Vehicle state concatenated with the previously applied control, so that
/// input-rate terms become functions of the current (state, input) pair.
struct AugmentedState {
  VehicleState base;
  ControlInput prev_control;
};

inline constexpr int kStateDim = 6;
inline constexpr int kInputDim = 2;

Eigen::VectorXd to_vector(const AugmentedState& x);
AugmentedState state_from_vector(const Eigen::VectorXd& v);
Eigen::Vector2d to_vector(const ControlInput& u);
ControlInput input_from_vector(const Eigen::Vector2d& v);

/// Discrete probability vector on the d-simplex. Construction rejects
/// negative entries and sums farther than 1e-9 from one.
class ProbabilityVector {
 public:
  ProbabilityVector() = default;
  explicit ProbabilityVector(Eigen::VectorXd values);
  static ProbabilityVector uniform(int d);

  int size() const { return static_cast<int>(values_.size()); }
  double operator[](int i) const { return values_[i]; }
  const Eigen::VectorXd& values() const { return values_; }

  static constexpr double kSumTolerance = 1e-9;

 private:
  Eigen::VectorXd values_;
};

/// Control/state tree with one shared segment of length split_step and
/// num_branches independent tails out to the horizon. The branching-node
/// state is stored once, in the shared sequence, so the branch-consistency
/// equality holds by construction.
class TrajectoryTree {
 public:
  TrajectoryTree() = default;
  TrajectoryTree(std::vector<ControlInput> shared_inputs,
                 std::vector<std::vector<ControlInput>> branch_inputs,
                 std::vector<AugmentedState> shared_states,
                 std::vector<std::vector<AugmentedState>> branch_states);

  int num_branches() const { return static_cast<int>(branch_inputs_.size()); }
  int split_step() const { return static_cast<int>(shared_inputs_.size()); }
  int horizon() const {
    return split_step() + (branch_inputs_.empty()
                               ? 0
                               : static_cast<int>(branch_inputs_[0].size()));
  }

  /// State at step t along branch i; for t <= split_step the shared state.
  const AugmentedState& state(int branch, int t) const;
  /// Input applied at step t along branch i; for t < split_step shared.
  const ControlInput& input(int branch, int t) const;

  AugmentedState& mutable_state(int branch, int t);
  ControlInput& mutable_input(int branch, int t);

  const std::vector<ControlInput>& shared_inputs() const {
    return shared_inputs_;
  }
  const std::vector<AugmentedState>& shared_states() const {
    return shared_states_;
  }
  const std::vector<std::vector<ControlInput>>& branch_inputs() const {
    return branch_inputs_;
  }
  const std::vector<std::vector<AugmentedState>>& branch_states() const {
    return branch_states_;
  }

 private:
  std::vector<ControlInput> shared_inputs_;                  // t in [0, Ts)
  std::vector<std::vector<ControlInput>> branch_inputs_;     // t in [Ts, T)
  std::vector<AugmentedState> shared_states_;                // t in [0, Ts]
  std::vector<std::vector<AugmentedState>> branch_states_;   // t in (Ts, T]
};

using DynamicsFn =
    std::function<AugmentedState(const AugmentedState&, const ControlInput&)>;

/// Nonlinear rollout of a shared + per-branch input tree from x0.
/// Throws std::invalid_argument on empty or ragged branch input sequences.
TrajectoryTree build_tree(const AugmentedState& x0,
                          const std::vector<ControlInput>& shared,
                          const std::vector<std::vector<ControlInput>>& branches,
                          const DynamicsFn& dynamics);

struct SolverSettings {
  int max_outer_iters{10};
  int max_inner_iters{100};
  double cost_tolerance{1e-4};
  double constraint_tolerance{1e-3};
  double gradient_tolerance{1e-4};

  double mu_init{1.0};
  double mu_scale{10.0};
  double mu_max{1e6};

  double line_search_beta{0.5};
  double line_search_c{1e-4};
  int line_search_max_steps{10};

  double hessian_reg_init{1e-6};
  double hessian_reg_scale{10.0};
  double hessian_reg_max{1e8};

  double gamma{0.5};        // ascent step size (numerator when gamma_auto)
  bool gamma_auto{true};    // scale gamma by 1/max(1, |branch cost|) at start
  double rho0{1.0};         // initial ascent regularization weight
  double alpha{0.6};        // CVaR level defining the ambiguity set

  bool risk_ascent{true};     // false freezes q = p (nominal planner)
  bool parallel_branches{false};

  /// Throws std::invalid_argument when a range constraint is violated.
  void validate() const;
};

struct SolveResult {
  TrajectoryTree tree;
  ProbabilityVector q_final;
  bool converged{false};
  int outer_iters{0};
  int total_inner_iters{0};
  double final_cost{0.0};
  double max_constraint_violation{0.0};
  double solve_time{0.0};  // [s]
};

}  // namespace rbmpc
