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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rbmpc/types.hpp"
#include "rbmpc/vehicle_model.hpp"

using namespace rbmpc;

namespace {

DynamicsFn bicycle_dynamics(const BicycleParams& params) {
  return [params](const AugmentedState& x, const ControlInput& u) {
    return step(x, u, params);
  };
}

std::vector<ControlInput> zeros(int n) {
  return std::vector<ControlInput>(n, ControlInput{0.0, 0.0});
}

}  // namespace

TEST_CASE("build_tree: zero inputs at rest keep the pose frozen") {
  BicycleParams params;
  AugmentedState x0;
  x0.base = VehicleState{1.0, -2.0, 0.7, 0.0};

  const auto tree = build_tree(x0, zeros(2), {zeros(2), zeros(2)},
                               bicycle_dynamics(params));
  CHECK(tree.split_step() == 2);
  CHECK(tree.horizon() == 4);
  CHECK(tree.num_branches() == 2);
  for (int i = 0; i < 2; ++i) {
    for (int t = 0; t <= 4; ++t) {
      const auto& s = tree.state(i, t);
      CHECK(s.base.px == doctest::Approx(1.0).epsilon(1e-15));
      CHECK(s.base.py == doctest::Approx(-2.0).epsilon(1e-15));
      CHECK(s.base.theta == doctest::Approx(0.7).epsilon(1e-15));
      CHECK(s.base.v == 0.0);
    }
  }
}

TEST_CASE("build_tree: straight constant-speed motion advances 1 m per step") {
  BicycleParams params;  // dt = 0.1
  AugmentedState x0;
  x0.base = VehicleState{0.0, 0.0, 0.0, 10.0};

  const auto tree =
      build_tree(x0, zeros(3), {zeros(4)}, bicycle_dynamics(params));
  for (int t = 0; t <= 7; ++t) {
    const auto& s = tree.state(0, t);
    CHECK(s.base.px == doctest::Approx(1.0 * t).epsilon(1e-12));
    CHECK(s.base.py == 0.0);
    CHECK(s.base.theta == 0.0);
    CHECK(s.base.v == 10.0);
  }
}

TEST_CASE("build_tree: planning-scale tree shapes") {
  BicycleParams params;
  AugmentedState x0;
  x0.base = VehicleState{0.0, 0.0, 0.0, 5.0};

  const int ts = 5;
  const int horizon = 50;
  const int d = 4;
  const auto tree =
      build_tree(x0, zeros(ts), std::vector<std::vector<ControlInput>>(
                                    d, zeros(horizon - ts)),
                 bicycle_dynamics(params));
  CHECK(tree.shared_inputs().size() == 5);
  CHECK(tree.shared_states().size() == 6);
  CHECK(tree.num_branches() == 4);
  for (int i = 0; i < d; ++i) {
    CHECK(tree.branch_inputs()[i].size() == 45);
    CHECK(tree.branch_states()[i].size() == 45);
  }
  CHECK(tree.horizon() == 50);
}

TEST_CASE("build_tree: rebuilding from its own inputs is bit-identical") {
  BicycleParams params;
  AugmentedState x0;
  x0.base = VehicleState{0.3, -0.4, 0.2, 6.0};
  x0.prev_control = ControlInput{0.5, -0.02};

  std::vector<ControlInput> shared{{1.0, 0.05}, {-0.5, -0.03}, {0.2, 0.0}};
  std::vector<std::vector<ControlInput>> branches{
      {{0.5, 0.01}, {0.1, -0.04}}, {{-1.0, 0.06}, {0.3, 0.02}}};

  const auto tree1 =
      build_tree(x0, shared, branches, bicycle_dynamics(params));
  const auto tree2 =
      build_tree(x0, shared, branches, bicycle_dynamics(params));
  for (int i = 0; i < 2; ++i) {
    for (int t = 0; t <= tree1.horizon(); ++t) {
      CHECK(tree1.state(i, t).base.px == tree2.state(i, t).base.px);
      CHECK(tree1.state(i, t).base.py == tree2.state(i, t).base.py);
      CHECK(tree1.state(i, t).base.theta == tree2.state(i, t).base.theta);
      CHECK(tree1.state(i, t).base.v == tree2.state(i, t).base.v);
    }
  }
}

TEST_CASE("build_tree: branching state is shared by construction") {
  BicycleParams params;
  AugmentedState x0;
  x0.base = VehicleState{0.0, 0.0, 0.1, 4.0};
  std::vector<std::vector<ControlInput>> branches{
      {{2.0, 0.1}}, {{-2.0, -0.1}}, {{0.0, 0.0}}};
  const auto tree = build_tree(x0, zeros(2), branches,
                               bicycle_dynamics(params));
  const auto& split = tree.state(0, tree.split_step());
  for (int i = 1; i < 3; ++i) {
    CHECK(&tree.state(i, tree.split_step()) == &split);
  }
}

TEST_CASE("build_tree: rejects malformed input trees") {
  BicycleParams params;
  AugmentedState x0;
  const auto dyn = bicycle_dynamics(params);
  CHECK_THROWS_AS(build_tree(x0, {}, {zeros(2)}, dyn), std::invalid_argument);
  CHECK_THROWS_AS(build_tree(x0, zeros(2), {}, dyn), std::invalid_argument);
  CHECK_THROWS_AS(build_tree(x0, zeros(2), {zeros(2), zeros(3)}, dyn),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_tree(x0, zeros(2), {zeros(0)}, dyn),
                  std::invalid_argument);
}

TEST_CASE("ProbabilityVector validates entries and the sum") {
  CHECK_NOTHROW(ProbabilityVector(Eigen::Vector4d(0.25, 0.25, 0.25, 0.25)));
  CHECK_NOTHROW(ProbabilityVector(Eigen::Vector2d(1.0 + 5e-10, -0.0)));
  CHECK_THROWS_AS(ProbabilityVector(Eigen::Vector2d(0.6, 0.6)),
                  std::invalid_argument);
  CHECK_THROWS_AS(ProbabilityVector(Eigen::Vector2d(1.5, -0.5)),
                  std::invalid_argument);
  CHECK_THROWS_AS(ProbabilityVector(Eigen::VectorXd()),
                  std::invalid_argument);
  const auto u = ProbabilityVector::uniform(4);
  CHECK(u.size() == 4);
  CHECK(u[2] == doctest::Approx(0.25));
}

TEST_CASE("SolverSettings range validation") {
  SolverSettings s;
  CHECK_NOTHROW(s.validate());
  SolverSettings bad = s;
  bad.mu_scale = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = s;
  bad.line_search_beta = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = s;
  bad.alpha = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = s;
  bad.gamma = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = s;
  bad.rho0 = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
