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

#include "rbmpc/ilqr_tree_solver.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

namespace rbmpc {

namespace {

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

StageModel build_stage_model(const TreeOcp& problem, const NodeRef& node,
                             const Eigen::VectorXd& x,
                             const Eigen::VectorXd& u) {
  StageModel m;
  m.cost = problem.quadratize_cost(node, x, u);
  problem.linearize_dynamics(node, x, u, m.A, m.B);
  m.h = problem.constraints(node, x, u);
  problem.constraint_jacobians(node, x, u, m.hJx, m.hJu);
  return m;
}

TerminalModel build_terminal_model(const TreeOcp& problem, int branch,
                                   const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& u_zero) {
  TerminalModel m;
  m.cost = problem.quadratize_terminal_cost(branch, x);
  const NodeRef node{branch, problem.horizon()};
  m.h = problem.constraints(node, x, u_zero);
  problem.constraint_jacobians(node, x, u_zero, m.hJx, m.hJu);
  return m;
}

// Q-model assembly: (q-weighted) cost expansion + AL terms + value model
// propagated through the linearized dynamics.
struct QModel {
  Eigen::MatrixXd Hxx, Hxu, Huu;
  Eigen::VectorXd gx, gu;
  double c{0.0};
};

QModel assemble_q(const StageModel& m, double q_weight,
                  const Eigen::VectorXd& lambda, double mu,
                  const ValueModel& next) {
  QModel q;
  q.Hxx = q_weight * m.cost.Hxx + m.A.transpose() * next.Vxx * m.A;
  q.Hxu = q_weight * m.cost.Hxu + m.A.transpose() * next.Vxx * m.B;
  q.Huu = q_weight * m.cost.Huu + m.B.transpose() * next.Vxx * m.B;
  q.gx = q_weight * m.cost.gx + m.A.transpose() * next.vx;
  q.gu = q_weight * m.cost.gu + m.B.transpose() * next.vx;
  q.c = q_weight * m.cost.c + next.v0;
  if (m.h.size() > 0) {
    const AugmentedTerms al = augmented_terms(m.h, lambda, mu, m.hJx, m.hJu);
    q.Hxx += al.Hxx;
    q.Hxu += al.Hxu;
    q.Huu += al.Huu;
    q.gx += al.gx;
    q.gu += al.gu;
    q.c += al.cost;
  }
  return q;
}

// Solves for the affine law at one node and rolls the value model back.
// Returns false when Quu + reg I fails the Cholesky factorization.
bool node_step(const QModel& q, double reg, Eigen::MatrixXd& K,
               Eigen::VectorXd& d, ValueModel& value, double& exp_lin,
               double& exp_quad) {
  Eigen::MatrixXd quu_reg = q.Huu;
  quu_reg.diagonal().array() += reg;
  if (!quu_reg.allFinite()) {
    return false;
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(quu_reg);
  if (llt.info() != Eigen::Success) {
    return false;
  }
  K = -llt.solve(q.Hxu.transpose());
  d = -llt.solve(q.gu);
  if (!K.allFinite() || !d.allFinite()) {
    return false;
  }

  exp_lin += d.dot(q.gu);
  exp_quad += d.dot(q.Huu * d);

  value.Vxx = q.Hxx + q.Hxu * K + K.transpose() * q.Hxu.transpose() +
              K.transpose() * q.Huu * K;
  value.Vxx = 0.5 * (value.Vxx + value.Vxx.transpose()).eval();
  value.vx = q.gx + K.transpose() * q.gu + q.Hxu * d +
             K.transpose() * (q.Huu * d);
  value.v0 = q.c + q.gu.dot(d) + 0.5 * d.dot(q.Huu * d);
  return true;
}

struct BranchSweep {
  bool ok{false};
  std::vector<Eigen::MatrixXd> K;
  std::vector<Eigen::VectorXd> d;
  std::vector<ValueModel> values;  // states Ts..T, entry 0 = V_i(Ts)
  double exp_lin{0.0};
  double exp_quad{0.0};
};

BranchSweep sweep_branch(const TreeModels& models, int i, double qi,
                         const ConstraintState& cs, int d_branches, int ts,
                         int horizon, double reg) {
  const int tail = horizon - ts;
  BranchSweep sweep;
  sweep.K.resize(tail);
  sweep.d.resize(tail);
  sweep.values.resize(tail + 1);

  const TerminalModel& term = models.terminal[i];
  ValueModel value;
  value.Vxx = qi * term.cost.Hxx;
  value.vx = qi * term.cost.gx;
  value.v0 = qi * term.cost.c;
  if (term.h.size() > 0) {
    const int idx = tree_node_index(d_branches, ts, horizon, i, horizon);
    const AugmentedTerms al =
        augmented_terms(term.h, cs.lambda[idx], cs.mu, term.hJx, term.hJu);
    value.Vxx += al.Hxx;
    value.vx += al.gx;
    value.v0 += al.cost;
  }
  sweep.values[tail] = value;

  for (int t = horizon - 1; t >= ts; --t) {
    const int j = t - ts;
    const StageModel& m = models.branch[i][j];
    const int idx = tree_node_index(d_branches, ts, horizon, i, t);
    const QModel q = assemble_q(m, qi, cs.lambda[idx], cs.mu, value);
    if (!node_step(q, reg, sweep.K[j], sweep.d[j], value, sweep.exp_lin,
                   sweep.exp_quad)) {
      return sweep;  // ok stays false
    }
    sweep.values[j] = value;
  }
  sweep.ok = true;
  return sweep;
}

}  // namespace

TreeModels build_models(const TreeOcp& problem, const VecTree& tree,
                        bool parallel_branches) {
  const int d = tree.num_branches();
  const int ts = tree.split_step();
  const int horizon = tree.horizon();
  const Eigen::VectorXd u_zero = Eigen::VectorXd::Zero(problem.input_dim());

  TreeModels models;
  models.shared.resize(ts);
  for (int t = 0; t < ts; ++t) {
    models.shared[t] = build_stage_model(problem, NodeRef{-1, t},
                                         tree.state(0, t), tree.input(0, t));
  }

  models.branch.resize(d);
  models.terminal.resize(d);
  auto expand_branch = [&](int i) {
    models.branch[i].resize(horizon - ts);
    for (int t = ts; t < horizon; ++t) {
      models.branch[i][t - ts] = build_stage_model(
          problem, NodeRef{i, t}, tree.state(i, t), tree.input(i, t));
    }
    models.terminal[i] =
        build_terminal_model(problem, i, tree.state(i, horizon), u_zero);
  };

  if (parallel_branches && d > 1) {
    std::vector<std::thread> workers;
    workers.reserve(d);
    for (int i = 0; i < d; ++i) {
      workers.emplace_back(expand_branch, i);
    }
    for (auto& w : workers) {
      w.join();
    }
  } else {
    for (int i = 0; i < d; ++i) {
      expand_branch(i);
    }
  }
  return models;
}

BackwardPassResult backward_pass(const TreeModels& models,
                                 const Eigen::VectorXd& q,
                                 const ConstraintState& cs, double reg,
                                 bool parallel_branches) {
  const int d = static_cast<int>(models.branch.size());
  const int ts = static_cast<int>(models.shared.size());
  const int horizon = ts + static_cast<int>(models.branch[0].size());

  BackwardPassResult result;
  result.law.branch_K.resize(d);
  result.law.branch_d.resize(d);
  result.branch_values.resize(d);

  std::vector<BranchSweep> sweeps(d);
  if (parallel_branches && d > 1) {
    std::vector<std::thread> workers;
    workers.reserve(d);
    for (int i = 0; i < d; ++i) {
      workers.emplace_back([&, i]() {
        sweeps[i] = sweep_branch(models, i, q[i], cs, d, ts, horizon, reg);
      });
    }
    for (auto& w : workers) {
      w.join();
    }
  } else {
    for (int i = 0; i < d; ++i) {
      sweeps[i] = sweep_branch(models, i, q[i], cs, d, ts, horizon, reg);
    }
  }

  for (int i = 0; i < d; ++i) {
    if (!sweeps[i].ok) {
      return result;  // signal regularization needed
    }
  }

  // Branching node: the branch value models are summed in index order so
  // parallel execution stays bit-comparable to the sequential sweep.
  const int nx = static_cast<int>(models.shared[0].A.rows());
  ValueModel value;
  value.Vxx = Eigen::MatrixXd::Zero(nx, nx);
  value.vx = Eigen::VectorXd::Zero(nx);
  value.v0 = 0.0;
  for (int i = 0; i < d; ++i) {
    value.Vxx += sweeps[i].values[0].Vxx;
    value.vx += sweeps[i].values[0].vx;
    value.v0 += sweeps[i].values[0].v0;
    result.law.branch_K[i] = std::move(sweeps[i].K);
    result.law.branch_d[i] = std::move(sweeps[i].d);
    result.branch_values[i] = std::move(sweeps[i].values);
    result.law.exp_linear += sweeps[i].exp_lin;
    result.law.exp_quadratic += sweeps[i].exp_quad;
  }

  result.shared_values.resize(ts + 1);
  result.shared_values[ts] = value;
  result.law.shared_K.resize(ts);
  result.law.shared_d.resize(ts);
  for (int t = ts - 1; t >= 0; --t) {
    const StageModel& m = models.shared[t];
    const QModel qm = assemble_q(m, 1.0, cs.lambda[t], cs.mu, value);
    if (!node_step(qm, reg, result.law.shared_K[t], result.law.shared_d[t],
                   value, result.law.exp_linear, result.law.exp_quadratic)) {
      return result;
    }
    result.shared_values[t] = value;
  }
  result.ok = true;
  return result;
}

TreeCost eval_tree_cost(const TreeOcp& problem, const VecTree& tree,
                        const ConstraintState& cs) {
  const int d = tree.num_branches();
  const int ts = tree.split_step();
  const int horizon = tree.horizon();
  const Eigen::VectorXd u_zero = Eigen::VectorXd::Zero(problem.input_dim());

  TreeCost out;
  out.branch_costs = Eigen::VectorXd::Zero(d);
  out.h_per_node.resize(tree_node_count(d, ts, horizon));

  auto account = [&](const NodeRef& node, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& u, int idx) {
    Eigen::VectorXd h = problem.constraints(node, x, u);
    if (h.size() > 0) {
      out.al_cost += augmented_cost(h, cs.lambda[idx], cs.mu);
      out.max_violation = std::max(out.max_violation, h.maxCoeff());
    }
    out.h_per_node[idx] = std::move(h);
  };

  for (int t = 0; t < ts; ++t) {
    const NodeRef node{-1, t};
    out.shared_cost += problem.cost(node, tree.state(0, t), tree.input(0, t));
    account(node, tree.state(0, t), tree.input(0, t), t);
  }
  for (int i = 0; i < d; ++i) {
    for (int t = ts; t < horizon; ++t) {
      const NodeRef node{i, t};
      out.branch_costs[i] +=
          problem.cost(node, tree.state(i, t), tree.input(i, t));
      account(node, tree.state(i, t), tree.input(i, t),
              tree_node_index(d, ts, horizon, i, t));
    }
    out.branch_costs[i] += problem.terminal(i, tree.state(i, horizon));
    account(NodeRef{i, horizon}, tree.state(i, horizon), u_zero,
            tree_node_index(d, ts, horizon, i, horizon));
  }
  out.max_violation = std::max(out.max_violation, 0.0);
  return out;
}

ForwardPassResult forward_pass(const TreeOcp& problem, const VecTree& tree,
                               const TreeModels& models,
                               const FeedbackLaw& law,
                               const Eigen::VectorXd& q,
                               const ConstraintState& cs,
                               double current_total,
                               const SolverSettings& settings) {
  (void)models;
  const int d = tree.num_branches();
  const int ts = tree.split_step();
  const int horizon = tree.horizon();

  ForwardPassResult result;
  result.tree = tree;

  double s = 1.0;
  for (int trial = 0; trial < settings.line_search_max_steps;
       ++trial, s *= settings.line_search_beta) {
    ++result.trials;

    VecTree cand;
    cand.shared_inputs.resize(ts);
    cand.shared_states.reserve(ts + 1);
    cand.shared_states.push_back(tree.shared_states[0]);
    cand.branch_inputs.assign(d, {});
    cand.branch_states.assign(d, {});

    bool finite = true;
    for (int t = 0; t < ts && finite; ++t) {
      const Eigen::VectorXd& x = cand.shared_states.back();
      Eigen::VectorXd u = tree.shared_inputs[t] + s * law.shared_d[t] +
                          law.shared_K[t] * (x - tree.shared_states[t]);
      Eigen::VectorXd xn = problem.dynamics(NodeRef{-1, t}, x, u);
      finite = all_finite(u) && all_finite(xn);
      cand.shared_inputs[t] = std::move(u);
      cand.shared_states.push_back(std::move(xn));
    }
    for (int i = 0; i < d && finite; ++i) {
      cand.branch_inputs[i].resize(horizon - ts);
      cand.branch_states[i].reserve(horizon - ts);
      Eigen::VectorXd x = cand.shared_states.back();
      for (int t = ts; t < horizon && finite; ++t) {
        const int j = t - ts;
        Eigen::VectorXd u = tree.branch_inputs[i][j] +
                            s * law.branch_d[i][j] +
                            law.branch_K[i][j] * (x - tree.state(i, t));
        Eigen::VectorXd xn = problem.dynamics(NodeRef{i, t}, x, u);
        finite = all_finite(u) && all_finite(xn);
        cand.branch_inputs[i][j] = std::move(u);
        x = xn;
        cand.branch_states[i].push_back(std::move(xn));
      }
    }
    if (!finite) {
      continue;
    }

    TreeCost cost = eval_tree_cost(problem, cand, cs);
    const double total = cost.total(q);
    if (!std::isfinite(total)) {
      continue;
    }
    if (total <= current_total +
                     settings.line_search_c * law.expected_change(s)) {
      result.tree = std::move(cand);
      result.cost = std::move(cost);
      result.step_size = s;
      result.accepted = true;
      return result;
    }
  }
  return result;
}

ConstraintState init_constraint_state(const TreeOcp& problem,
                                      double mu_init) {
  const int d = problem.num_branches();
  const int ts = problem.split_step();
  const int horizon = problem.horizon();

  ConstraintState cs;
  cs.mu = mu_init;
  cs.lambda.resize(tree_node_count(d, ts, horizon));
  cs.h.resize(cs.lambda.size());
  for (int t = 0; t < ts; ++t) {
    const int n = problem.num_constraints(NodeRef{-1, t});
    cs.lambda[t] = Eigen::VectorXd::Zero(n);
    cs.h[t] = Eigen::VectorXd::Zero(n);
  }
  for (int i = 0; i < d; ++i) {
    for (int t = ts; t <= horizon; ++t) {
      const int idx = tree_node_index(d, ts, horizon, i, t);
      const int n = problem.num_constraints(NodeRef{i, t});
      cs.lambda[idx] = Eigen::VectorXd::Zero(n);
      cs.h[idx] = Eigen::VectorXd::Zero(n);
    }
  }
  return cs;
}

InnerLoopResult minmax_ilqr_tree(const TreeOcp& problem, const VecTree& tree0,
                                 const ProbabilityVector& q_init,
                                 const AmbiguitySet& set,
                                 ConstraintState& cs,
                                 const SolverSettings& settings,
                                 double gamma_eff) {
  InnerLoopResult result;
  result.tree = tree0;
  result.q = q_init;
  result.cost = eval_tree_cost(problem, result.tree, cs);

  Eigen::VectorXd q = q_init.values();

  // Weight floor for the descent subproblem: branches driven to zero
  // probability keep a vestige of their cost model, otherwise their
  // trajectories drift on constraint terms alone and stall the line
  // search. The ascent and all reported costs use the true q.
  constexpr double kBranchWeightFloor = 1e-3;
  Eigen::VectorXd w = q.cwiseMax(kBranchWeightFloor);

  double current_total = result.cost.total(w);
  double reg = settings.hessian_reg_init;
  const double reg_floor = std::max(settings.hessian_reg_init, 1e-8);
  const bool risk = settings.risk_ascent && problem.num_branches() > 1;

  TreeModels models =
      build_models(problem, result.tree, settings.parallel_branches);

  for (int k = 0; k < settings.max_inner_iters; ++k) {
    ++result.stats.iterations;

    const BackwardPassResult bw =
        backward_pass(models, w, cs, reg, settings.parallel_branches);
    if (!bw.ok) {
      if (reg >= settings.hessian_reg_max) {
        break;  // give up, return best so far
      }
      reg = std::min(std::max(reg, reg_floor) * settings.hessian_reg_scale,
                     settings.hessian_reg_max);
      continue;
    }

    const ForwardPassResult fw =
        forward_pass(problem, result.tree, models, bw.law, w, cs,
                     current_total, settings);
    if (!fw.accepted) {
      ++result.stats.line_search_failures;
      if (reg >= settings.hessian_reg_max) {
        break;
      }
      reg = std::min(std::max(reg, reg_floor) * settings.hessian_reg_scale,
                     settings.hessian_reg_max);
      continue;
    }

    const double cost_drop = current_total - fw.cost.total(w);
    result.tree = fw.tree;
    result.cost = fw.cost;
    ++result.stats.accepted_steps;
    reg = std::max(reg / settings.hessian_reg_scale,
                   settings.hessian_reg_init);

    double q_change = 0.0;
    if (risk) {
      // Honor gamma * rho < 1 even for aggressive rho0 settings.
      const double rho_k = std::min(rho_schedule(settings.rho0, k),
                                    0.999 / gamma_eff);
      const ProbabilityVector q_next = ascent_step(
          set, result.q, result.cost.branch_costs, gamma_eff, rho_k);
      q_change = (q_next.values() - q).lpNorm<Eigen::Infinity>();
      result.q = q_next;
      q = q_next.values();
      w = q.cwiseMax(kBranchWeightFloor);
    }
    current_total = result.cost.total(w);
    result.stats.cost_history.push_back(current_total);
    result.stats.q_change_history.push_back(q_change);
    result.stats.descent_history.push_back(cost_drop);
    result.stats.q_history.push_back(q);
    result.stats.branch_cost_history.push_back(result.cost.branch_costs);

    if (std::abs(cost_drop) < settings.cost_tolerance &&
        q_change < settings.gradient_tolerance) {
      result.stats.converged = true;
      break;
    }

    models = build_models(problem, result.tree, settings.parallel_branches);
  }
  return result;
}

TreeSolveResult solve_tree(const TreeOcp& problem, const VecTree& u_init,
                           const ProbabilityVector& p,
                           const SolverSettings& settings) {
  settings.validate();
  const auto t_start = std::chrono::steady_clock::now();

  TreeSolveResult result;
  result.tree = rollout_tree(problem, u_init);
  result.q = p;

  const AmbiguitySet set(p, settings.alpha);
  ConstraintState cs = init_constraint_state(problem, settings.mu_init);

  TreeCost cost = eval_tree_cost(problem, result.tree, cs);
  double gamma_eff = settings.gamma;
  if (settings.gamma_auto) {
    const double scale =
        std::max(1.0, cost.branch_costs.cwiseAbs().maxCoeff());
    gamma_eff = settings.gamma / scale;
  }

  for (int outer = 0; outer < settings.max_outer_iters; ++outer) {
    InnerLoopResult inner = minmax_ilqr_tree(problem, result.tree, result.q,
                                             set, cs, settings, gamma_eff);
    result.tree = std::move(inner.tree);
    result.q = inner.q;
    result.total_inner_iters += inner.stats.iterations;
    result.outer_iters = outer + 1;
    result.max_constraint_violation = inner.cost.max_violation;
    result.shared_cost = inner.cost.shared_cost;
    result.branch_costs = inner.cost.branch_costs;
    result.final_cost =
        inner.cost.shared_cost + result.q.values().dot(inner.cost.branch_costs);
    result.last_inner = std::move(inner.stats);

    if (result.max_constraint_violation <= settings.constraint_tolerance &&
        result.last_inner.converged) {
      result.converged = true;
      break;
    }
    if (outer + 1 < settings.max_outer_iters) {
      cs.h = inner.cost.h_per_node;
      update_multipliers(cs, settings.mu_scale, settings.mu_max);
    }
  }

  result.solve_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return result;
}

}  // namespace rbmpc
