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

#include <string>
#include <vector>

#include "rbmpc/behavior_planner.hpp"
#include "rbmpc/constraint_model.hpp"
#include "rbmpc/cost_model.hpp"
#include "rbmpc/polyline.hpp"
#include "rbmpc/types.hpp"
#include "rbmpc/vehicle_model.hpp"

namespace rbmpc {

/// One behavior hypothesis of a surrounding vehicle: a label plus the
/// predicted footprint-center poses sampled at the planner period.
struct ModeTrajectory {
  std::string label;
  std::vector<ObstaclePrediction> poses;
};

struct SurroundingVehicle {
  std::string name;
  std::vector<ModeTrajectory> modes;
  int true_mode{0};
};

/// Full description of one intersection-crossing experiment. Joint behavior
/// modes enumerate the product of the per-vehicle mode sets; vehicle 0's
/// mode index varies fastest.
struct ScenarioConfig {
  std::string name{"TS1"};

  BicycleParams params;
  CostWeights weights;
  SolverSettings settings;
  SamplerParams sampler;
  ScoreWeights score_weights;

  int horizon{50};
  int split_step{5};

  AugmentedState ego_start;
  std::vector<Eigen::Vector2d> ego_path;
  double ego_desired_speed{5.0};
  std::vector<double> speed_fractions{1.0, 0.8, 0.6, 0.4, 0.2, 0.0};

  std::vector<SurroundingVehicle> vehicles;
  ProbabilityVector p;  // over joint modes

  double vehicle_length{4.8};
  double vehicle_width{2.0};
  double rear_overhang{0.9};
  int n_circles{3};
  double corridor_half_width{2.0};

  double t_a{1.0};          // [s] intent-reveal time
  double sim_duration{9.0}; // [s]

  double perturb_long{3.0};        // [m]
  double perturb_lat{1.0};         // [m]
  double perturb_speed_frac{0.1};

  int num_joint_modes() const;
  /// Per-vehicle mode indices of joint mode j.
  std::vector<int> joint_mode(int j) const;
  int true_joint_mode() const;

  void validate() const;
};

/// Built-in test scenarios. TS1: ego turns left while two crossing vehicles
/// each either yield or assert. TS2: the vehicle approaching from the right
/// either turns left or goes straight; the other one yields or asserts.
/// Throws std::invalid_argument for unknown names.
ScenarioConfig make_scenario(const std::string& name);

/// Uniformly perturbs the ego initial state: +-perturb_long along the
/// heading, +-perturb_lat across it, +-perturb_speed_frac relative speed.
/// Deterministic in the seed.
ScenarioConfig perturb_initial(const ScenarioConfig& config,
                               std::uint64_t seed);

/// Reads a scenario file: a built-in name under "scenario" plus optional
/// overrides, or a fully custom description. Throws std::runtime_error on
/// parse or schema errors.
ScenarioConfig load_scenario(const std::string& path);

/// Writes the full config as a scenario file (the custom-schema form).
void save_scenario(const ScenarioConfig& config, const std::string& path);

}  // namespace rbmpc
