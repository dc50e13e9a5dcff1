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

#include <cstdint>
#include <vector>

#include "rbmpc/driving_problem.hpp"
#include "rbmpc/scenario.hpp"
#include "rbmpc/types.hpp"

namespace rbmpc {

/// One planning cycle assembled from a scenario: the tree problem for the
/// active joint modes and the sampling-planner reference.
struct PlanningCycle {
  DrivingTreeProblem problem;
  ReferencePlan plan;
};

/// Builds the problem seen by the planner at simulation step sim_step from
/// state x0, restricted to the given joint modes (all modes before the
/// intent-reveal time, the true mode after it). Shared nodes see the union
/// of the active per-vehicle mode predictions.
PlanningCycle build_planning_cycle(const ScenarioConfig& config,
                                   const AugmentedState& x0, int sim_step,
                                   const std::vector<int>& active_modes);

struct OpenLoopRun {
  SolveResult result;
  double shared_cost{0.0};
  Eigen::VectorXd branch_costs;  // at the solution
  double risk_value{0.0};        // max of q'J over the ambiguity set
  double nominal_value{0.0};     // p'J
  InnerLoopStats last_inner;
};

/// One behavior-planner initial guess plus one full solve.
OpenLoopRun run_open_loop(const ScenarioConfig& config);

struct SimStep {
  double t{0.0};
  VehicleState ego;
  ControlInput applied;
  bool converged{false};
  int outer_iters{0};
  int inner_iters{0};
  double solve_time{0.0};
  double cost{0.0};
  double max_violation{0.0};
  Eigen::VectorXd q;  // padded to the full joint-mode count
  std::vector<Eigen::Vector2d> vehicle_positions;
};

struct SimTrace {
  std::vector<SimStep> steps;
  bool failed{false};
  double dt{0.1};
  int collapse_step{0};
};

/// Closed loop at the planner period: before t_a the planner sees all
/// modes with the configured p and alpha; from t_a on it is granted the
/// true joint mode (single branch, ascent inert). Applies the first shared
/// input each step and warm starts from the previous solution shifted by
/// one step. A non-converged solve truncates the trace with failed = true.
SimTrace run_closed_loop(const ScenarioConfig& config);

struct MonteCarloSample {
  std::uint64_t seed{0};
  bool converged{false};
  int outer_iters{0};
  int inner_iters{0};
  double time_ms{0.0};
  double cost{0.0};
  double max_violation{0.0};
  double risk_value{0.0};
  double nominal_value{0.0};
};

struct MonteCarloSummary {
  std::vector<MonteCarloSample> risk;     // ascent enabled (as configured)
  std::vector<MonteCarloSample> nominal;  // same seeds, ascent disabled
};

/// Open-loop study over perturbed initial states with seeds
/// seed0..seed0+n-1; each seed is solved by both the risk-aware and the
/// nominal planner. Samples may run on a worker pool; results are stored
/// by sample index, so aggregates are independent of the thread count.
MonteCarloSummary monte_carlo(const ScenarioConfig& config, int n_samples,
                              std::uint64_t seed0 = 0, int jobs = 1);

double convergence_rate(const std::vector<MonteCarloSample>& samples);
double mean_time_ms(const std::vector<MonteCarloSample>& samples);
/// Linear-interpolation percentile (pct in [0, 100]) of solve time.
double percentile_time_ms(const std::vector<MonteCarloSample>& samples,
                          double pct);
double percentile_inner_iters(const std::vector<MonteCarloSample>& samples,
                              double pct);

}  // namespace rbmpc
