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

#include "rbmpc/behavior_planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rbmpc {

std::vector<SampledTrajectory> sample_trajectories(
    const AugmentedState& x0, const Polyline& path,
    const std::vector<double>& desired_speeds, const BicycleParams& params,
    const SamplerParams& sampler, int horizon) {
  if (desired_speeds.empty()) {
    throw std::invalid_argument("sample_trajectories: no desired speeds");
  }
  if (horizon < 1) {
    throw std::invalid_argument("sample_trajectories: horizon < 1");
  }

  std::vector<SampledTrajectory> out;
  out.reserve(desired_speeds.size());
  const double dt = params.dt;

  for (double v_des : desired_speeds) {
    SampledTrajectory traj;
    traj.desired_speed = v_des;
    traj.states.reserve(horizon + 1);
    traj.inputs.reserve(horizon);
    traj.states.push_back(x0);

    AugmentedState x = x0;
    double prev_err = v_des - x.base.v;
    for (int t = 0; t < horizon; ++t) {
      const double err = v_des - x.base.v;
      double a = sampler.kp * err + sampler.kd * (err - prev_err) / dt;
      prev_err = err;
      a = std::clamp(a, params.a_min, params.a_max);
      if (std::isfinite(params.a_rate_max)) {
        a = std::min(a, x.prev_control.a + params.a_rate_max * dt);
      }
      if (std::isfinite(params.a_rate_min)) {
        a = std::max(a, x.prev_control.a + params.a_rate_min * dt);
      }
      // the speed bounds win over the rate limits in the rollout
      a = std::clamp(a, (params.v_min - x.base.v) / dt,
                     (params.v_max - x.base.v) / dt);

      const Eigen::Vector2d pos(x.base.px, x.base.py);
      const double s_here = path.project(pos);
      const double lookahead =
          std::max(sampler.min_lookahead, sampler.lookahead_time * x.base.v);
      const Eigen::Vector2d target = path.point_at(s_here + lookahead);
      const Eigen::Vector2d to_target = target - pos;
      const double target_angle = std::atan2(to_target.y(), to_target.x());
      double angle_err = target_angle - x.base.theta;
      angle_err = std::remainder(angle_err, 2.0 * M_PI);
      const double ld = std::max(to_target.norm(), 1e-6);
      double delta =
          std::atan(2.0 * params.wheelbase * std::sin(angle_err) / ld);
      delta = std::clamp(delta, params.delta_min, params.delta_max);
      if (std::isfinite(params.delta_rate_max)) {
        delta = std::min(delta,
                         x.prev_control.delta + params.delta_rate_max * dt);
      }
      if (std::isfinite(params.delta_rate_min)) {
        delta = std::max(delta,
                         x.prev_control.delta + params.delta_rate_min * dt);
      }

      const ControlInput u{a, delta};
      x = step(x, u, params);
      traj.inputs.push_back(u);
      traj.states.push_back(x);
    }
    out.push_back(std::move(traj));
  }
  return out;
}

namespace {

double trajectory_score(
    const SampledTrajectory& traj,
    const std::vector<std::vector<ObstaclePrediction>>& obstacles,
    const Polyline& path, const ScoreWeights& w, double best_progress) {
  const Eigen::Vector2d last(traj.states.back().base.px,
                             traj.states.back().base.py);
  const double progress = path.project(last);
  double score = w.w_progress * (best_progress - progress);

  double prox = 0.0;
  for (std::size_t t = 0; t < traj.states.size(); ++t) {
    if (t >= obstacles.size()) break;
    const Eigen::Vector2d pos(traj.states[t].base.px, traj.states[t].base.py);
    for (const auto& obs : obstacles[t]) {
      const double gap = w.prox_dist - (pos - obs.position).norm();
      if (gap > 0.0) {
        prox += gap * gap;
      }
    }
  }
  score += w.w_proximity * prox;

  double comfort = 0.0;
  for (const auto& u : traj.inputs) {
    comfort += u.a * u.a + 5.0 * u.delta * u.delta;
  }
  score += w.w_comfort * comfort;
  return score;
}

}  // namespace

ReferencePlan select_reference_tree(
    const std::vector<SampledTrajectory>& samples,
    const std::vector<std::vector<std::vector<ObstaclePrediction>>>&
        mode_obstacles,
    const Polyline& path, const ScoreWeights& weights, int split_step) {
  if (samples.empty()) {
    throw std::invalid_argument("select_reference_tree: no samples");
  }
  const int d = static_cast<int>(mode_obstacles.size());
  if (d < 1) {
    throw std::invalid_argument("select_reference_tree: no modes");
  }
  const int horizon = static_cast<int>(samples.front().inputs.size());
  if (split_step < 1 || split_step >= horizon) {
    throw std::invalid_argument("select_reference_tree: bad split step");
  }

  double best_progress = 0.0;
  for (const auto& traj : samples) {
    const Eigen::Vector2d last(traj.states.back().base.px,
                               traj.states.back().base.py);
    best_progress = std::max(best_progress, path.project(last));
  }

  std::vector<int> selected(d, 0);
  for (int i = 0; i < d; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < samples.size(); ++k) {
      const double score = trajectory_score(samples[k], mode_obstacles[i],
                                            path, weights, best_progress);
      if (score < best) {
        best = score;
        selected[i] = static_cast<int>(k);
      }
    }
  }

  // Shared segment from the most conservative selection: lowest speed at
  // the split step, ties towards the lower mode index.
  int conservative = selected[0];
  double v_min = samples[selected[0]].states[split_step].base.v;
  for (int i = 1; i < d; ++i) {
    const double v = samples[selected[i]].states[split_step].base.v;
    if (v < v_min) {
      v_min = v;
      conservative = selected[i];
    }
  }

  const SampledTrajectory& shared_src = samples[conservative];
  std::vector<ControlInput> shared_inputs(
      shared_src.inputs.begin(), shared_src.inputs.begin() + split_step);
  std::vector<AugmentedState> shared_states(
      shared_src.states.begin(), shared_src.states.begin() + split_step + 1);

  std::vector<std::vector<ControlInput>> branch_inputs(d);
  std::vector<std::vector<AugmentedState>> branch_states(d);
  for (int i = 0; i < d; ++i) {
    const SampledTrajectory& src = samples[selected[i]];
    branch_inputs[i].assign(src.inputs.begin() + split_step,
                            src.inputs.end());
    branch_states[i].assign(src.states.begin() + split_step + 1,
                            src.states.end());
  }

  ReferencePlan plan;
  plan.tree = TrajectoryTree(std::move(shared_inputs), std::move(branch_inputs),
                             std::move(shared_states),
                             std::move(branch_states));
  plan.selected_sample = std::move(selected);
  return plan;
}

CorridorTree build_corridor(const TrajectoryTree& ref_tree,
                            double half_width) {
  if (!(half_width > 0.0)) {
    throw std::invalid_argument("build_corridor: half_width must be positive");
  }
  auto corridor_at = [&](const AugmentedState& ref) {
    Corridor c;
    c.ref_position = Eigen::Vector2d(ref.base.px, ref.base.py);
    c.ref_heading = ref.base.theta;
    c.half_width = half_width;
    return c;
  };

  CorridorTree out;
  out.shared.reserve(ref_tree.shared_states().size());
  for (const auto& x : ref_tree.shared_states()) {
    out.shared.push_back(corridor_at(x));
  }
  out.branch.resize(ref_tree.num_branches());
  for (int i = 0; i < ref_tree.num_branches(); ++i) {
    out.branch[i].reserve(ref_tree.branch_states()[i].size());
    for (const auto& x : ref_tree.branch_states()[i]) {
      out.branch[i].push_back(corridor_at(x));
    }
  }
  return out;
}

}  // namespace rbmpc
