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

#include "rbmpc/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <optional>
#include <thread>

#include "rbmpc/risk_ascent.hpp"

namespace rbmpc {

namespace {

ObstaclePrediction pose_at(const ModeTrajectory& mode, int step) {
  const int last = static_cast<int>(mode.poses.size()) - 1;
  return mode.poses[std::clamp(step, 0, last)];
}

std::vector<double> desired_speeds(const ScenarioConfig& cfg) {
  std::vector<double> speeds;
  speeds.reserve(cfg.speed_fractions.size());
  for (double f : cfg.speed_fractions) {
    speeds.push_back(std::max(0.0, f * cfg.ego_desired_speed));
  }
  return speeds;
}

}  // namespace

PlanningCycle build_planning_cycle(const ScenarioConfig& cfg,
                                   const AugmentedState& x0, int sim_step,
                                   const std::vector<int>& active_modes) {
  const int d = static_cast<int>(active_modes.size());
  const int ts = cfg.split_step;
  const int horizon = cfg.horizon;

  // Obstacle predictions per active joint mode and node step.
  std::vector<std::vector<std::vector<ObstaclePrediction>>> mode_obstacles(d);
  for (int i = 0; i < d; ++i) {
    const std::vector<int> combo = cfg.joint_mode(active_modes[i]);
    mode_obstacles[i].resize(horizon + 1);
    for (int t = 0; t <= horizon; ++t) {
      mode_obstacles[i][t].reserve(cfg.vehicles.size());
      for (std::size_t v = 0; v < cfg.vehicles.size(); ++v) {
        mode_obstacles[i][t].push_back(
            pose_at(cfg.vehicles[v].modes[combo[v]], sim_step + t));
      }
    }
  }

  // Shared nodes guard against every per-vehicle mode that appears in any
  // active joint mode.
  std::vector<std::vector<int>> shared_vehicle_modes(cfg.vehicles.size());
  for (int i = 0; i < d; ++i) {
    const std::vector<int> combo = cfg.joint_mode(active_modes[i]);
    for (std::size_t v = 0; v < cfg.vehicles.size(); ++v) {
      auto& seen = shared_vehicle_modes[v];
      if (std::find(seen.begin(), seen.end(), combo[v]) == seen.end()) {
        seen.push_back(combo[v]);
      }
    }
  }

  const Polyline path(cfg.ego_path);
  const std::vector<SampledTrajectory> samples = sample_trajectories(
      x0, path, desired_speeds(cfg), cfg.params, cfg.sampler, horizon);
  ReferencePlan plan = select_reference_tree(samples, mode_obstacles, path,
                                             cfg.score_weights, ts);
  const CorridorTree corridors =
      build_corridor(plan.tree, cfg.corridor_half_width);

  const FootprintCircles ego_circles = make_footprint(
      cfg.n_circles, cfg.vehicle_length, cfg.vehicle_width, cfg.rear_overhang);
  const FootprintCircles obstacle_circles =
      make_footprint(cfg.n_circles, cfg.vehicle_length, cfg.vehicle_width,
                     cfg.vehicle_length / 2.0);

  DrivingTreeProblem problem(cfg.params, cfg.weights, ego_circles,
                             obstacle_circles, x0, d, ts, horizon);

  for (int t = 0; t < ts; ++t) {
    NodeContext ctx;
    ctx.ref = plan.tree.shared_states()[t];
    for (std::size_t v = 0; v < cfg.vehicles.size(); ++v) {
      for (int m : shared_vehicle_modes[v]) {
        ctx.obstacles.push_back(pose_at(cfg.vehicles[v].modes[m], sim_step + t));
      }
    }
    ctx.corridor = corridors.shared[t];
    problem.set_shared_node(t, std::move(ctx));
  }

  for (int i = 0; i < d; ++i) {
    for (int t = ts; t <= horizon; ++t) {
      NodeContext ctx;
      ctx.ref = plan.tree.state(i, t);
      ctx.obstacles = mode_obstacles[i][t];
      ctx.corridor = t == ts ? corridors.shared[ts]
                             : corridors.branch[i][t - ts - 1];
      problem.set_branch_node(i, t, std::move(ctx));
    }
  }

  return PlanningCycle{std::move(problem), std::move(plan)};
}

OpenLoopRun run_open_loop(const ScenarioConfig& cfg) {
  cfg.validate();
  const int d = cfg.num_joint_modes();
  std::vector<int> active(d);
  std::iota(active.begin(), active.end(), 0);

  PlanningCycle cycle = build_planning_cycle(cfg, cfg.ego_start, 0, active);

  OpenLoopRun run;
  TreeSolveResult details;
  run.result = solve_branch_mpc(cycle.problem, cycle.plan.tree, cfg.p,
                                cfg.settings, &details);
  run.shared_cost = details.shared_cost;
  run.branch_costs = details.branch_costs;
  run.last_inner = details.last_inner;

  const AmbiguitySet set(cfg.p, cfg.settings.alpha);
  run.risk_value = cvar_value(set, run.branch_costs).value;
  run.nominal_value = cfg.p.values().dot(run.branch_costs);
  return run;
}

namespace {

// Previous solution shifted by one step; the shared tail is taken from the
// highest-probability branch (ties towards the lower index).
TrajectoryTree warm_start_inputs(const TrajectoryTree& prev,
                                 const Eigen::VectorXd& prev_q,
                                 const std::vector<int>& prev_active,
                                 const std::vector<int>& active) {
  int pick = 0;
  if (active.size() == prev_active.size()) {
    prev_q.maxCoeff(&pick);
  } else {
    // Collapse: locate the surviving joint mode in the previous active set.
    for (std::size_t i = 0; i < prev_active.size(); ++i) {
      if (prev_active[i] == active.front()) {
        pick = static_cast<int>(i);
        break;
      }
    }
  }

  std::vector<ControlInput> shared(prev.shared_inputs().begin() + 1,
                                   prev.shared_inputs().end());
  shared.push_back(prev.branch_inputs()[pick][0]);

  std::vector<std::vector<ControlInput>> branches;
  if (active.size() == prev_active.size()) {
    branches.resize(prev.num_branches());
    for (int i = 0; i < prev.num_branches(); ++i) {
      branches[i].assign(prev.branch_inputs()[i].begin() + 1,
                         prev.branch_inputs()[i].end());
      branches[i].push_back(prev.branch_inputs()[i].back());
    }
  } else {
    branches.resize(1);
    branches[0].assign(prev.branch_inputs()[pick].begin() + 1,
                       prev.branch_inputs()[pick].end());
    branches[0].push_back(prev.branch_inputs()[pick].back());
  }

  std::vector<std::vector<AugmentedState>> no_states(branches.size());
  return TrajectoryTree(std::move(shared), std::move(branches), {},
                        std::move(no_states));
}

}  // namespace

SimTrace run_closed_loop(const ScenarioConfig& cfg) {
  cfg.validate();
  const double dt = cfg.params.dt;
  const int sim_steps =
      std::max(1, static_cast<int>(std::round(cfg.sim_duration / dt)));
  const int d_full = cfg.num_joint_modes();
  const int true_joint = cfg.true_joint_mode();

  SimTrace trace;
  trace.dt = dt;
  trace.collapse_step =
      static_cast<int>(std::ceil(cfg.t_a / dt - 1e-9));

  std::vector<int> all_modes(d_full);
  std::iota(all_modes.begin(), all_modes.end(), 0);

  AugmentedState x = cfg.ego_start;
  std::optional<TrajectoryTree> prev_tree;
  Eigen::VectorXd prev_q;
  std::vector<int> prev_active;

  for (int s = 0; s < sim_steps; ++s) {
    const bool collapsed = s >= trace.collapse_step;
    const std::vector<int> active =
        collapsed ? std::vector<int>{true_joint} : all_modes;
    const ProbabilityVector p_active =
        collapsed ? ProbabilityVector(Eigen::VectorXd::Ones(1)) : cfg.p;

    PlanningCycle cycle = build_planning_cycle(cfg, x, s, active);
    const TrajectoryTree u_init =
        (prev_tree.has_value())
            ? warm_start_inputs(*prev_tree, prev_q, prev_active, active)
            : cycle.plan.tree;

    TreeSolveResult details;
    const SolveResult sol = solve_branch_mpc(cycle.problem, u_init, p_active,
                                             cfg.settings, &details);

    SimStep step_record;
    step_record.t = s * dt;
    step_record.ego = x.base;
    step_record.applied = sol.tree.shared_inputs()[0];
    step_record.converged = sol.converged;
    step_record.outer_iters = sol.outer_iters;
    step_record.inner_iters = sol.total_inner_iters;
    step_record.solve_time = sol.solve_time;
    step_record.cost = sol.final_cost;
    step_record.max_violation = sol.max_constraint_violation;
    step_record.q = Eigen::VectorXd::Zero(d_full);
    for (std::size_t i = 0; i < active.size(); ++i) {
      step_record.q[active[i]] = sol.q_final[static_cast<int>(i)];
    }
    step_record.vehicle_positions.reserve(cfg.vehicles.size());
    for (const auto& v : cfg.vehicles) {
      step_record.vehicle_positions.push_back(
          pose_at(v.modes[v.true_mode], s).position);
    }
    trace.steps.push_back(std::move(step_record));

    if (!sol.converged) {
      trace.failed = true;
      break;
    }

    x = step(x, sol.tree.shared_inputs()[0], cfg.params);
    prev_tree = sol.tree;
    prev_q = sol.q_final.values();
    prev_active = active;
  }
  return trace;
}

MonteCarloSummary monte_carlo(const ScenarioConfig& cfg, int n_samples,
                              std::uint64_t seed0, int jobs) {
  if (n_samples < 1) {
    throw std::invalid_argument("monte_carlo: n_samples must be >= 1");
  }
  MonteCarloSummary summary;
  summary.risk.resize(n_samples);
  summary.nominal.resize(n_samples);

  auto run_sample = [&](int i) {
    const std::uint64_t seed = seed0 + static_cast<std::uint64_t>(i);
    const ScenarioConfig perturbed = perturb_initial(cfg, seed);

    auto fill = [&](const OpenLoopRun& run, MonteCarloSample& out) {
      out.seed = seed;
      out.converged = run.result.converged;
      out.outer_iters = run.result.outer_iters;
      out.inner_iters = run.result.total_inner_iters;
      out.time_ms = run.result.solve_time * 1e3;
      out.cost = run.result.final_cost;
      out.max_violation = run.result.max_constraint_violation;
      out.risk_value = run.risk_value;
      out.nominal_value = run.nominal_value;
    };

    fill(run_open_loop(perturbed), summary.risk[i]);

    ScenarioConfig nominal = perturbed;
    nominal.settings.risk_ascent = false;
    fill(run_open_loop(nominal), summary.nominal[i]);
  };

  const int workers = std::max(1, jobs);
  if (workers == 1) {
    for (int i = 0; i < n_samples; ++i) {
      run_sample(i);
    }
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (int i = next.fetch_add(1); i < n_samples;
             i = next.fetch_add(1)) {
          run_sample(i);
        }
      });
    }
    for (auto& t : pool) {
      t.join();
    }
  }
  return summary;
}

double convergence_rate(const std::vector<MonteCarloSample>& samples) {
  if (samples.empty()) return 0.0;
  int ok = 0;
  for (const auto& s : samples) {
    ok += s.converged ? 1 : 0;
  }
  return static_cast<double>(ok) / static_cast<double>(samples.size());
}

namespace {

double percentile(std::vector<double> values, double pct) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos =
      std::clamp(pct, 0.0, 100.0) / 100.0 * (values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

}  // namespace

double mean_time_ms(const std::vector<MonteCarloSample>& samples) {
  if (samples.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& s : samples) sum += s.time_ms;
  return sum / static_cast<double>(samples.size());
}

double percentile_time_ms(const std::vector<MonteCarloSample>& samples,
                          double pct) {
  std::vector<double> values;
  values.reserve(samples.size());
  for (const auto& s : samples) values.push_back(s.time_ms);
  return percentile(std::move(values), pct);
}

double percentile_inner_iters(const std::vector<MonteCarloSample>& samples,
                              double pct) {
  std::vector<double> values;
  values.reserve(samples.size());
  for (const auto& s : samples) {
    values.push_back(static_cast<double>(s.inner_iters));
  }
  return percentile(std::move(values), pct);
}

}  // namespace rbmpc
