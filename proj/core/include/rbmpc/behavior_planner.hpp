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

#include <vector>

#include "rbmpc/constraint_model.hpp"
#include "rbmpc/polyline.hpp"
#include "rbmpc/types.hpp"
#include "rbmpc/vehicle_model.hpp"

namespace rbmpc {

/// Gains for the sampling rollouts: PD on the speed error for the
/// longitudinal motion, pure pursuit for the lateral motion.
struct SamplerParams {
  double kp{1.0};
  double kd{0.3};
  double lookahead_time{0.8};  // [s]
  double min_lookahead{3.0};   // [m]
};

struct SampledTrajectory {
  double desired_speed{0.0};
  std::vector<AugmentedState> states;  // length horizon + 1
  std::vector<ControlInput> inputs;    // length horizon
};

/// Forward simulates the bicycle along the path once per desired speed.
/// Throws std::invalid_argument on an empty speed list.
std::vector<SampledTrajectory> sample_trajectories(
    const AugmentedState& x0, const Polyline& path,
    const std::vector<double>& desired_speeds, const BicycleParams& params,
    const SamplerParams& sampler, int horizon);

/// Trajectory selection criteria. The score is a placeholder for a real
/// behavior planner: progress deficit along the path plus a proximity
/// penalty against the mode's predictions plus an input comfort term.
struct ScoreWeights {
  double w_progress{1.0};
  double w_proximity{2.0};
  double w_comfort{0.05};
  double prox_dist{5.0};  // [m] proximity penalty onset
};

/// Reference trajectory tree: states are tracking targets, inputs seed the
/// solver. Assembled from per-mode selected samples; not a dynamic rollout.
struct ReferencePlan {
  TrajectoryTree tree;
  std::vector<int> selected_sample;  // per joint mode, index into samples
};

/// Per joint mode, picks the lowest-score sample against that mode's
/// obstacle predictions (indexed [mode][step][obstacle]); the shared
/// segment is taken from the most conservative selected sample, the one
/// with the lowest speed at the split step.
ReferencePlan select_reference_tree(
    const std::vector<SampledTrajectory>& samples,
    const std::vector<std::vector<std::vector<ObstaclePrediction>>>&
        mode_obstacles,
    const Polyline& path, const ScoreWeights& weights, int split_step);

/// Corridor half-plane pairs per tree state node.
struct CorridorTree {
  std::vector<Corridor> shared;                 // states 0..Ts
  std::vector<std::vector<Corridor>> branch;    // states Ts+1..T per branch
};

/// Lateral corridor of the given half width about each reference node.
CorridorTree build_corridor(const TrajectoryTree& ref_tree, double half_width);

}  // namespace rbmpc
