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

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rbmpc/simulation.hpp"

namespace {

using nlohmann::json;

int log_level() {
  const char* env = std::getenv("RBMPC_LOG");
  if (env == nullptr) return 1;
  const std::string v(env);
  if (v == "quiet") return 0;
  if (v == "debug") return 2;
  return 1;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) {
    std::cerr << msg << "\n";
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json tree_to_json(const rbmpc::TrajectoryTree& tree) {
  auto input_row = [](const rbmpc::ControlInput& u) {
    return json::array({u.a, u.delta});
  };
  auto state_row = [](const rbmpc::AugmentedState& x) {
    return json::array({x.base.px, x.base.py, x.base.theta, x.base.v,
                        x.prev_control.a, x.prev_control.delta});
  };

  json j;
  j["split_step"] = tree.split_step();
  j["horizon"] = tree.horizon();
  j["num_branches"] = tree.num_branches();
  j["shared"]["inputs"] = json::array();
  j["shared"]["states"] = json::array();
  for (const auto& u : tree.shared_inputs()) {
    j["shared"]["inputs"].push_back(input_row(u));
  }
  for (const auto& x : tree.shared_states()) {
    j["shared"]["states"].push_back(state_row(x));
  }
  j["branches"] = json::array();
  for (int i = 0; i < tree.num_branches(); ++i) {
    json b;
    b["inputs"] = json::array();
    b["states"] = json::array();
    for (const auto& u : tree.branch_inputs()[i]) {
      b["inputs"].push_back(input_row(u));
    }
    for (const auto& x : tree.branch_states()[i]) {
      b["states"].push_back(state_row(x));
    }
    j["branches"].push_back(std::move(b));
  }
  return j;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open output file " + path);
  }
  out << content;
}

struct CommonOpts {
  std::string scenario_file;
  double alpha{-1.0};
  double rho0{-1.0};
  double gamma{-1.0};
  bool nominal{false};
  std::string out;
};

rbmpc::ScenarioConfig load_with_overrides(const CommonOpts& opts) {
  rbmpc::ScenarioConfig cfg = rbmpc::load_scenario(opts.scenario_file);
  if (opts.alpha >= 0.0) cfg.settings.alpha = opts.alpha;
  if (opts.rho0 >= 0.0) cfg.settings.rho0 = opts.rho0;
  if (opts.gamma > 0.0) {
    cfg.settings.gamma = opts.gamma;
    cfg.settings.gamma_auto = false;
  }
  if (opts.nominal) cfg.settings.risk_ascent = false;
  cfg.validate();
  return cfg;
}

int cmd_solve(const CommonOpts& opts) {
  const rbmpc::ScenarioConfig cfg = load_with_overrides(opts);
  log_info("solving scenario " + cfg.name + " (alpha=" +
           std::to_string(cfg.settings.alpha) + ")");

  const rbmpc::OpenLoopRun run = rbmpc::run_open_loop(cfg);
  const rbmpc::SolveResult& res = run.result;

  json j;
  j["schema"] = "rbmpc-solve-v1";
  j["scenario"] = cfg.name;
  j["alpha"] = cfg.settings.alpha;
  j["nominal"] = !cfg.settings.risk_ascent;
  j["converged"] = res.converged;
  j["outer_iters"] = res.outer_iters;
  j["inner_iters"] = res.total_inner_iters;
  j["final_cost"] = res.final_cost;
  j["max_constraint_violation"] = res.max_constraint_violation;
  j["solve_time_ms"] = res.solve_time * 1e3;
  j["q"] = std::vector<double>(res.q_final.values().data(),
                               res.q_final.values().data() +
                                   res.q_final.size());
  j["branch_costs"] = std::vector<double>(
      run.branch_costs.data(), run.branch_costs.data() + run.branch_costs.size());
  j["shared_cost"] = run.shared_cost;
  j["risk_value"] = run.risk_value;
  j["nominal_value"] = run.nominal_value;
  j["tree"] = tree_to_json(res.tree);

  if (!opts.out.empty()) {
    write_file(opts.out, j.dump(2) + "\n");
  }
  std::cout << (res.converged ? "converged" : "not converged") << " in "
            << res.outer_iters << " outer / " << res.total_inner_iters
            << " inner iterations, cost " << res.final_cost << ", "
            << res.solve_time * 1e3 << " ms\n";
  return 0;
}

int cmd_montecarlo(const CommonOpts& opts, int n, std::uint64_t seed,
                   int jobs) {
  const rbmpc::ScenarioConfig cfg = load_with_overrides(opts);
  log_info("running " + std::to_string(n) + " Monte Carlo samples on " +
           cfg.name);

  const rbmpc::MonteCarloSummary summary =
      rbmpc::monte_carlo(cfg, n, seed, jobs);

  std::string csv;
  csv += "# rbmpc-montecarlo-v1\n";
  csv += "# scenario=" + cfg.name + " alpha=" + fmt(cfg.settings.alpha) +
         " n=" + std::to_string(n) + " seed=" + std::to_string(seed) + "\n";
  auto summarize = [&](const char* label,
                       const std::vector<rbmpc::MonteCarloSample>& s) {
    csv += std::string("# ") + label +
           ": convergence=" + fmt(rbmpc::convergence_rate(s)) +
           " mean_time_ms=" + fmt(rbmpc::mean_time_ms(s)) +
           " p50_time_ms=" + fmt(rbmpc::percentile_time_ms(s, 50)) +
           " p95_time_ms=" + fmt(rbmpc::percentile_time_ms(s, 95)) +
           " p50_iters=" + fmt(rbmpc::percentile_inner_iters(s, 50)) +
           " p75_iters=" + fmt(rbmpc::percentile_inner_iters(s, 75)) + "\n";
  };
  summarize("risk", summary.risk);
  summarize("nominal", summary.nominal);

  csv +=
      "seed,planner,converged,outer_iters,inner_iters,time_ms,final_cost,"
      "max_violation,risk_value,nominal_value\n";
  auto rows = [&](const char* label,
                  const std::vector<rbmpc::MonteCarloSample>& samples) {
    for (const auto& s : samples) {
      csv += std::to_string(s.seed) + "," + label + "," +
             (s.converged ? "1" : "0") + "," + std::to_string(s.outer_iters) +
             "," + std::to_string(s.inner_iters) + "," + fmt(s.time_ms) +
             "," + fmt(s.cost) + "," + fmt(s.max_violation) + "," +
             fmt(s.risk_value) + "," + fmt(s.nominal_value) + "\n";
    }
  };
  rows("risk", summary.risk);
  rows("nominal", summary.nominal);

  if (!opts.out.empty()) {
    write_file(opts.out, csv);
  } else {
    std::cout << csv;
  }
  std::cout << "risk convergence " << rbmpc::convergence_rate(summary.risk)
            << ", nominal " << rbmpc::convergence_rate(summary.nominal)
            << ", risk mean " << rbmpc::mean_time_ms(summary.risk) << " ms\n";
  return 0;
}

int cmd_closedloop(const CommonOpts& opts, double ta) {
  rbmpc::ScenarioConfig cfg = load_with_overrides(opts);
  if (ta >= 0.0) cfg.t_a = ta;
  log_info("closed-loop run on " + cfg.name + ", t_a=" +
           std::to_string(cfg.t_a));

  const rbmpc::SimTrace trace = rbmpc::run_closed_loop(cfg);
  const int d = cfg.num_joint_modes();

  std::string csv;
  csv += "# rbmpc-trace-v1\n";
  csv += "# scenario=" + cfg.name + " alpha=" + fmt(cfg.settings.alpha) +
         " t_a=" + fmt(cfg.t_a) +
         (cfg.settings.risk_ascent ? "" : " nominal") + "\n";
  csv += "t,px,py,theta,v,a,delta,converged,outer_iters,inner_iters,"
         "solve_time_ms,cost,max_violation";
  for (int i = 0; i < d; ++i) {
    csv += ",q" + std::to_string(i);
  }
  for (std::size_t v = 0; v < cfg.vehicles.size(); ++v) {
    csv += "," + cfg.vehicles[v].name + "_x," + cfg.vehicles[v].name + "_y";
  }
  csv += "\n";

  for (const auto& s : trace.steps) {
    csv += fmt(s.t) + "," + fmt(s.ego.px) + "," + fmt(s.ego.py) + "," +
           fmt(s.ego.theta) + "," + fmt(s.ego.v) + "," + fmt(s.applied.a) +
           "," + fmt(s.applied.delta) + "," + (s.converged ? "1" : "0") +
           "," + std::to_string(s.outer_iters) + "," +
           std::to_string(s.inner_iters) + "," + fmt(s.solve_time * 1e3) +
           "," + fmt(s.cost) + "," + fmt(s.max_violation);
    for (int i = 0; i < d; ++i) {
      csv += "," + fmt(s.q[i]);
    }
    for (const auto& pos : s.vehicle_positions) {
      csv += "," + fmt(pos.x()) + "," + fmt(pos.y());
    }
    csv += "\n";
  }

  if (!opts.out.empty()) {
    write_file(opts.out, csv);
  } else {
    std::cout << csv;
  }
  std::cout << (trace.failed ? "trace truncated (solver failure)"
                             : "trace complete")
            << ", " << trace.steps.size() << " steps\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"risk-aware branch MPC planner for multi-modal traffic"};
  app.require_subcommand(1);

  CommonOpts solve_opts;
  CLI::App* solve =
      app.add_subcommand("solve", "one open-loop solve of a scenario");
  solve->add_option("scenario", solve_opts.scenario_file, "scenario file")
      ->required();
  solve->add_option("--alpha", solve_opts.alpha, "CVaR level in [0,1]");
  solve->add_option("--rho0", solve_opts.rho0, "ascent regularization");
  solve->add_option("--gamma", solve_opts.gamma, "ascent step size (fixed)");
  solve->add_flag("--nominal", solve_opts.nominal, "freeze q = p");
  solve->add_option("--out", solve_opts.out, "result JSON path");

  CommonOpts mc_opts;
  int mc_n = 100;
  std::uint64_t mc_seed = 0;
  int mc_jobs = 1;
  CLI::App* mc = app.add_subcommand(
      "montecarlo", "open-loop convergence study over perturbed starts");
  mc->add_option("scenario", mc_opts.scenario_file, "scenario file")
      ->required();
  mc->add_option("--n", mc_n, "number of samples")
      ->check(CLI::PositiveNumber);
  mc->add_option("--seed", mc_seed, "base seed");
  mc->add_option("--jobs", mc_jobs, "worker threads")
      ->check(CLI::PositiveNumber);
  mc->add_option("--alpha", mc_opts.alpha, "CVaR level in [0,1]");
  mc->add_option("--rho0", mc_opts.rho0, "ascent regularization");
  mc->add_option("--gamma", mc_opts.gamma, "ascent step size (fixed)");
  mc->add_option("--out", mc_opts.out, "summary CSV path");

  CommonOpts cl_opts;
  double cl_ta = -1.0;
  CLI::App* cl = app.add_subcommand("closedloop",
                                    "closed-loop intersection simulation");
  cl->add_option("scenario", cl_opts.scenario_file, "scenario file")
      ->required();
  cl->add_option("--alpha", cl_opts.alpha, "CVaR level in [0,1]");
  cl->add_option("--ta", cl_ta, "intent-reveal time [s]");
  cl->add_option("--rho0", cl_opts.rho0, "ascent regularization");
  cl->add_option("--gamma", cl_opts.gamma, "ascent step size (fixed)");
  cl->add_flag("--nominal", cl_opts.nominal, "freeze q = p");
  cl->add_option("--out", cl_opts.out, "trace CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) {
      return cmd_solve(solve_opts);
    }
    if (mc->parsed()) {
      return cmd_montecarlo(mc_opts, mc_n, mc_seed, mc_jobs);
    }
    if (cl->parsed()) {
      return cmd_closedloop(cl_opts, cl_ta);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
