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

#include "rbmpc/scenario.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace rbmpc {

namespace {

constexpr double kLaneOffset = 1.75;   // lane center from road axis [m]
constexpr int kPredictionSteps = 220;  // generated mode-trajectory length

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform_range(std::mt19937_64& rng, double half_range) {
  return half_range * (2.0 * uniform01(rng) - 1.0);
}

std::vector<ObstaclePrediction> constant_speed_poses(const Polyline& path,
                                                     double s0, double v,
                                                     double dt, int steps) {
  std::vector<ObstaclePrediction> poses;
  poses.reserve(steps);
  for (int k = 0; k < steps; ++k) {
    const double s = s0 + v * dt * k;
    poses.push_back({path.point_at(s), path.heading_at(s)});
  }
  return poses;
}

std::vector<ObstaclePrediction> stop_at_poses(const Polyline& path, double s0,
                                              double v0, double s_stop,
                                              double dt, int steps) {
  const double dist = std::max(s_stop - s0, 1e-6);
  const double decel = v0 * v0 / (2.0 * dist);
  const double t_stop = v0 / std::max(decel, 1e-9);
  std::vector<ObstaclePrediction> poses;
  poses.reserve(steps);
  for (int k = 0; k < steps; ++k) {
    const double t = dt * k;
    double s;
    if (t >= t_stop) {
      s = s_stop;
    } else {
      s = s0 + v0 * t - 0.5 * decel * t * t;
    }
    poses.push_back({path.point_at(s), path.heading_at(s)});
  }
  return poses;
}

SurroundingVehicle make_crossing_vehicle(const std::string& name,
                                         const Polyline& path,
                                         const Eigen::Vector2d& start,
                                         double speed, double stop_s,
                                         double dt) {
  SurroundingVehicle vehicle;
  vehicle.name = name;
  const double s0 = path.project(start);
  vehicle.modes.push_back(
      {"Yield", stop_at_poses(path, s0, speed, stop_s, dt, kPredictionSteps)});
  vehicle.modes.push_back(
      {"Assert",
       constant_speed_poses(path, s0, speed, dt, kPredictionSteps)});
  return vehicle;
}

ScenarioConfig base_scenario() {
  ScenarioConfig cfg;
  cfg.params = BicycleParams{};
  cfg.weights = CostWeights{};
  cfg.settings = SolverSettings{};
  cfg.weights.dt = cfg.params.dt;

  // Ego: northbound on the right lane of the south arm, turning left onto
  // the westbound lane.
  cfg.ego_start.base = VehicleState{kLaneOffset, -18.0, M_PI / 2.0, 5.0};
  cfg.ego_start.prev_control = ControlInput{0.0, 0.0};
  cfg.ego_path = sample_arc_path(Eigen::Vector2d(kLaneOffset, -26.0),
                                 M_PI / 2.0, 21.0, 6.75, M_PI / 2.0, 36.0);
  cfg.ego_desired_speed = 5.0;
  return cfg;
}

}  // namespace

int ScenarioConfig::num_joint_modes() const {
  int d = 1;
  for (const auto& v : vehicles) {
    d *= static_cast<int>(v.modes.size());
  }
  return d;
}

std::vector<int> ScenarioConfig::joint_mode(int j) const {
  std::vector<int> idx(vehicles.size());
  int stride = 1;
  for (std::size_t v = 0; v < vehicles.size(); ++v) {
    const int n = static_cast<int>(vehicles[v].modes.size());
    idx[v] = (j / stride) % n;
    stride *= n;
  }
  return idx;
}

int ScenarioConfig::true_joint_mode() const {
  int j = 0;
  int stride = 1;
  for (const auto& v : vehicles) {
    j += v.true_mode * stride;
    stride *= static_cast<int>(v.modes.size());
  }
  return j;
}

void ScenarioConfig::validate() const {
  params.validate();
  weights.validate();
  settings.validate();
  if (horizon <= split_step || split_step < 1) {
    throw std::invalid_argument("ScenarioConfig: bad horizon/split_step");
  }
  if (ego_path.size() < 2) {
    throw std::invalid_argument("ScenarioConfig: ego path too short");
  }
  if (!(t_a >= 0.0)) {
    throw std::invalid_argument("ScenarioConfig: t_a must be >= 0");
  }
  for (const auto& v : vehicles) {
    if (v.modes.empty()) {
      throw std::invalid_argument("ScenarioConfig: vehicle without modes");
    }
    if (v.true_mode < 0 ||
        v.true_mode >= static_cast<int>(v.modes.size())) {
      throw std::invalid_argument("ScenarioConfig: true mode out of range");
    }
    for (const auto& m : v.modes) {
      if (static_cast<int>(m.poses.size()) < horizon + 1) {
        throw std::invalid_argument(
            "ScenarioConfig: mode trajectory shorter than the horizon");
      }
    }
  }
  if (p.size() != num_joint_modes()) {
    throw std::invalid_argument(
        "ScenarioConfig: p does not match the joint mode count");
  }
}

ScenarioConfig make_scenario(const std::string& name) {
  ScenarioConfig cfg = base_scenario();
  cfg.name = name;
  const double dt = cfg.params.dt;

  // Crossing roads: the north arm's southbound lane and the east arm's
  // westbound lane, both running through the intersection.
  const Polyline north_path(std::vector<Eigen::Vector2d>{
      {-kLaneOffset, 30.0}, {-kLaneOffset, -40.0}});
  const Polyline east_path(std::vector<Eigen::Vector2d>{
      {30.0, kLaneOffset}, {-40.0, kLaneOffset}});

  if (name == "TS1") {
    // The asserting north vehicle occupies the crossing right when the ego
    // would arrive at nominal speed; the east vehicle passes later, so
    // merging behind it is the mild interaction.
    cfg.vehicles.push_back(make_crossing_vehicle(
        "north", north_path, Eigen::Vector2d(-kLaneOffset, 20.5), 5.0,
        north_path.project(Eigen::Vector2d(-kLaneOffset, 6.5)), dt));
    cfg.vehicles.push_back(make_crossing_vehicle(
        "east", east_path, Eigen::Vector2d(14.0, kLaneOffset), 5.0,
        east_path.project(Eigen::Vector2d(6.5, kLaneOffset)), dt));
    // Closed-loop ground truth: the north vehicle yields, the east one
    // keeps a constant speed.
    cfg.vehicles[0].true_mode = 0;
    cfg.vehicles[1].true_mode = 1;
  } else if (name == "TS2") {
    cfg.vehicles.push_back(make_crossing_vehicle(
        "north", north_path, Eigen::Vector2d(-kLaneOffset, 20.5), 5.0,
        north_path.project(Eigen::Vector2d(-kLaneOffset, 6.5)), dt));

    SurroundingVehicle east;
    east.name = "east";
    const Polyline turn_path(sample_arc_path(Eigen::Vector2d(30.0, kLaneOffset),
                                             M_PI, 25.0, 6.75, M_PI / 2.0,
                                             36.0));
    const double s0_turn = turn_path.project(Eigen::Vector2d(18.0, kLaneOffset));
    east.modes.push_back(
        {"TurnLeft",
         constant_speed_poses(turn_path, s0_turn, 4.5, dt, kPredictionSteps)});
    const double s0_straight =
        east_path.project(Eigen::Vector2d(18.0, kLaneOffset));
    east.modes.push_back(
        {"GoStraight",
         constant_speed_poses(east_path, s0_straight, 5.0, dt,
                              kPredictionSteps)});
    east.true_mode = 1;
    cfg.vehicles.push_back(std::move(east));
    cfg.vehicles[0].true_mode = 0;
  } else {
    throw std::invalid_argument("make_scenario: unknown scenario " + name);
  }

  cfg.p = ProbabilityVector::uniform(cfg.num_joint_modes());
  cfg.validate();
  return cfg;
}

ScenarioConfig perturb_initial(const ScenarioConfig& config,
                               std::uint64_t seed) {
  ScenarioConfig out = config;
  std::mt19937_64 rng(seed);
  const double dl = uniform_range(rng, config.perturb_long);
  const double dlat = uniform_range(rng, config.perturb_lat);
  const double dv = uniform_range(rng, config.perturb_speed_frac);

  const double th = config.ego_start.base.theta;
  out.ego_start.base.px += dl * std::cos(th) - dlat * std::sin(th);
  out.ego_start.base.py += dl * std::sin(th) + dlat * std::cos(th);
  out.ego_start.base.v *= (1.0 + dv);
  return out;
}

namespace {

using nlohmann::json;

json to_json(const ScenarioConfig& cfg) {
  json j;
  j["schema"] = "rbmpc-scenario-v1";
  j["scenario"] = "custom";
  j["name"] = cfg.name;
  j["horizon"] = cfg.horizon;
  j["split_step"] = cfg.split_step;
  j["t_a"] = cfg.t_a;
  j["sim_duration"] = cfg.sim_duration;
  j["corridor_half_width"] = cfg.corridor_half_width;
  j["p"] = std::vector<double>(cfg.p.values().data(),
                               cfg.p.values().data() + cfg.p.size());

  j["ego"] = {
      {"start",
       {cfg.ego_start.base.px, cfg.ego_start.base.py, cfg.ego_start.base.theta,
        cfg.ego_start.base.v}},
      {"desired_speed", cfg.ego_desired_speed},
  };
  auto& path = j["ego"]["path"] = json::array();
  for (const auto& pt : cfg.ego_path) {
    path.push_back({pt.x(), pt.y()});
  }
  j["speed_fractions"] = cfg.speed_fractions;

  j["params"] = {{"wheelbase", cfg.params.wheelbase},
                 {"dt", cfg.params.dt},
                 {"v_min", cfg.params.v_min},
                 {"v_max", cfg.params.v_max},
                 {"a_min", cfg.params.a_min},
                 {"a_max", cfg.params.a_max},
                 {"delta_min", cfg.params.delta_min},
                 {"delta_max", cfg.params.delta_max},
                 {"a_rate_min", cfg.params.a_rate_min},
                 {"a_rate_max", cfg.params.a_rate_max},
                 {"delta_rate_min", cfg.params.delta_rate_min},
                 {"delta_rate_max", cfg.params.delta_rate_max}};

  j["weights"] = {{"w_pos", cfg.weights.w_pos},
                  {"w_heading", cfg.weights.w_heading},
                  {"w_speed", cfg.weights.w_speed},
                  {"w_a", cfg.weights.w_a},
                  {"w_delta", cfg.weights.w_delta},
                  {"w_da", cfg.weights.w_da},
                  {"w_ddelta", cfg.weights.w_ddelta},
                  {"w_saf", cfg.weights.w_saf},
                  {"d_prox", cfg.weights.d_prox},
                  {"center_offset", cfg.weights.center_offset}};

  j["planner"] = {{"max_outer_iters", cfg.settings.max_outer_iters},
                  {"max_inner_iters", cfg.settings.max_inner_iters},
                  {"cost_tolerance", cfg.settings.cost_tolerance},
                  {"constraint_tolerance", cfg.settings.constraint_tolerance},
                  {"gradient_tolerance", cfg.settings.gradient_tolerance},
                  {"mu_init", cfg.settings.mu_init},
                  {"mu_scale", cfg.settings.mu_scale},
                  {"mu_max", cfg.settings.mu_max},
                  {"line_search_beta", cfg.settings.line_search_beta},
                  {"line_search_c", cfg.settings.line_search_c},
                  {"line_search_max_steps", cfg.settings.line_search_max_steps},
                  {"hessian_reg_init", cfg.settings.hessian_reg_init},
                  {"hessian_reg_scale", cfg.settings.hessian_reg_scale},
                  {"alpha", cfg.settings.alpha},
                  {"gamma", cfg.settings.gamma},
                  {"gamma_auto", cfg.settings.gamma_auto},
                  {"rho0", cfg.settings.rho0},
                  {"risk_ascent", cfg.settings.risk_ascent},
                  {"parallel_branches", cfg.settings.parallel_branches}};

  j["vehicle"] = {{"length", cfg.vehicle_length},
                  {"width", cfg.vehicle_width},
                  {"rear_overhang", cfg.rear_overhang},
                  {"n_circles", cfg.n_circles}};

  j["perturbation"] = {{"longitudinal", cfg.perturb_long},
                       {"lateral", cfg.perturb_lat},
                       {"speed_fraction", cfg.perturb_speed_frac}};

  auto& vehicles = j["vehicles"] = json::array();
  for (const auto& v : cfg.vehicles) {
    json jv;
    jv["name"] = v.name;
    jv["true_mode"] = v.true_mode;
    auto& modes = jv["modes"] = json::array();
    for (const auto& m : v.modes) {
      json jm;
      jm["label"] = m.label;
      auto& poses = jm["poses"] = json::array();
      for (const auto& pose : m.poses) {
        poses.push_back({pose.position.x(), pose.position.y(), pose.heading});
      }
      modes.push_back(std::move(jm));
    }
    vehicles.push_back(std::move(jv));
  }
  return j;
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) {
    out = j.at(key).get<T>();
  }
}

void apply_overrides(const json& j, ScenarioConfig& cfg) {
  maybe(j, "name", cfg.name);
  maybe(j, "horizon", cfg.horizon);
  maybe(j, "split_step", cfg.split_step);
  maybe(j, "t_a", cfg.t_a);
  maybe(j, "sim_duration", cfg.sim_duration);
  maybe(j, "corridor_half_width", cfg.corridor_half_width);
  maybe(j, "speed_fractions", cfg.speed_fractions);

  if (j.contains("alpha")) {
    cfg.settings.alpha = j.at("alpha").get<double>();
  }
  if (j.contains("p")) {
    const auto vals = j.at("p").get<std::vector<double>>();
    cfg.p = ProbabilityVector(
        Eigen::Map<const Eigen::VectorXd>(vals.data(), vals.size()));
  }

  if (j.contains("ego")) {
    const json& e = j.at("ego");
    if (e.contains("start")) {
      const auto s = e.at("start").get<std::vector<double>>();
      if (s.size() != 4) {
        throw std::runtime_error("scenario: ego.start needs 4 entries");
      }
      cfg.ego_start.base = VehicleState{s[0], s[1], s[2], s[3]};
    }
    maybe(e, "desired_speed", cfg.ego_desired_speed);
    if (e.contains("path")) {
      cfg.ego_path.clear();
      for (const auto& pt : e.at("path")) {
        cfg.ego_path.emplace_back(pt.at(0).get<double>(),
                                  pt.at(1).get<double>());
      }
    }
  }

  if (j.contains("params")) {
    const json& p = j.at("params");
    maybe(p, "wheelbase", cfg.params.wheelbase);
    maybe(p, "dt", cfg.params.dt);
    maybe(p, "v_min", cfg.params.v_min);
    maybe(p, "v_max", cfg.params.v_max);
    maybe(p, "a_min", cfg.params.a_min);
    maybe(p, "a_max", cfg.params.a_max);
    maybe(p, "delta_min", cfg.params.delta_min);
    maybe(p, "delta_max", cfg.params.delta_max);
    maybe(p, "a_rate_min", cfg.params.a_rate_min);
    maybe(p, "a_rate_max", cfg.params.a_rate_max);
    maybe(p, "delta_rate_min", cfg.params.delta_rate_min);
    maybe(p, "delta_rate_max", cfg.params.delta_rate_max);
    cfg.weights.dt = cfg.params.dt;
  }

  if (j.contains("weights")) {
    const json& w = j.at("weights");
    maybe(w, "w_pos", cfg.weights.w_pos);
    maybe(w, "w_heading", cfg.weights.w_heading);
    maybe(w, "w_speed", cfg.weights.w_speed);
    maybe(w, "w_a", cfg.weights.w_a);
    maybe(w, "w_delta", cfg.weights.w_delta);
    maybe(w, "w_da", cfg.weights.w_da);
    maybe(w, "w_ddelta", cfg.weights.w_ddelta);
    maybe(w, "w_saf", cfg.weights.w_saf);
    maybe(w, "d_prox", cfg.weights.d_prox);
    maybe(w, "center_offset", cfg.weights.center_offset);
  }

  if (j.contains("planner")) {
    const json& s = j.at("planner");
    maybe(s, "max_outer_iters", cfg.settings.max_outer_iters);
    maybe(s, "max_inner_iters", cfg.settings.max_inner_iters);
    maybe(s, "cost_tolerance", cfg.settings.cost_tolerance);
    maybe(s, "constraint_tolerance", cfg.settings.constraint_tolerance);
    maybe(s, "gradient_tolerance", cfg.settings.gradient_tolerance);
    maybe(s, "mu_init", cfg.settings.mu_init);
    maybe(s, "mu_scale", cfg.settings.mu_scale);
    maybe(s, "mu_max", cfg.settings.mu_max);
    maybe(s, "line_search_beta", cfg.settings.line_search_beta);
    maybe(s, "line_search_c", cfg.settings.line_search_c);
    maybe(s, "line_search_max_steps", cfg.settings.line_search_max_steps);
    maybe(s, "hessian_reg_init", cfg.settings.hessian_reg_init);
    maybe(s, "hessian_reg_scale", cfg.settings.hessian_reg_scale);
    maybe(s, "alpha", cfg.settings.alpha);
    maybe(s, "gamma", cfg.settings.gamma);
    maybe(s, "gamma_auto", cfg.settings.gamma_auto);
    maybe(s, "rho0", cfg.settings.rho0);
    maybe(s, "risk_ascent", cfg.settings.risk_ascent);
    maybe(s, "parallel_branches", cfg.settings.parallel_branches);
  }

  if (j.contains("vehicle")) {
    const json& v = j.at("vehicle");
    maybe(v, "length", cfg.vehicle_length);
    maybe(v, "width", cfg.vehicle_width);
    maybe(v, "rear_overhang", cfg.rear_overhang);
    maybe(v, "n_circles", cfg.n_circles);
  }

  if (j.contains("perturbation")) {
    const json& p = j.at("perturbation");
    maybe(p, "longitudinal", cfg.perturb_long);
    maybe(p, "lateral", cfg.perturb_lat);
    maybe(p, "speed_fraction", cfg.perturb_speed_frac);
  }

  if (j.contains("vehicles")) {
    cfg.vehicles.clear();
    for (const auto& jv : j.at("vehicles")) {
      SurroundingVehicle v;
      v.name = jv.value("name", std::string("vehicle"));
      v.true_mode = jv.value("true_mode", 0);
      for (const auto& jm : jv.at("modes")) {
        ModeTrajectory m;
        m.label = jm.value("label", std::string("mode"));
        for (const auto& pose : jm.at("poses")) {
          m.poses.push_back(
              {Eigen::Vector2d(pose.at(0).get<double>(),
                               pose.at(1).get<double>()),
               pose.at(2).get<double>()});
        }
        v.modes.push_back(std::move(m));
      }
      cfg.vehicles.push_back(std::move(v));
    }
    if (!j.contains("p")) {
      cfg.p = ProbabilityVector::uniform(cfg.num_joint_modes());
    }
  }
}

}  // namespace

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_scenario: cannot open " + path);
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("load_scenario: parse error in " + path + ": " +
                             e.what());
  }

  const std::string base = j.value("scenario", std::string("custom"));
  ScenarioConfig cfg;
  if (base == "TS1" || base == "TS2") {
    cfg = make_scenario(base);
  } else if (base == "custom") {
    cfg = base_scenario();
    cfg.vehicles.clear();
  } else {
    throw std::runtime_error("load_scenario: unknown scenario " + base);
  }
  try {
    apply_overrides(j, cfg);
  } catch (const json::exception& e) {
    throw std::runtime_error("load_scenario: bad field in " + path + ": " +
                             e.what());
  }
  cfg.validate();
  return cfg;
}

void save_scenario(const ScenarioConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("save_scenario: cannot open " + path);
  }
  out << to_json(config).dump(2) << "\n";
}

}  // namespace rbmpc
