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

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rbmpc/constraint_model.hpp"

using namespace rbmpc;

namespace {

ConstraintContext basic_context(bool with_input = true) {
  ConstraintContext ctx;
  ctx.params = BicycleParams{};
  ctx.with_input = with_input;
  return ctx;
}

ConstraintContext collision_context(double ego_radius, double obs_radius,
                                    const Eigen::Vector2d& obs_pos,
                                    double obs_heading = 0.0) {
  ConstraintContext ctx = basic_context();
  // single circle per body, unconstrained box bounds
  ctx.params.v_min = ctx.params.a_min = ctx.params.delta_min =
      ctx.params.a_rate_min = ctx.params.delta_rate_min =
          -std::numeric_limits<double>::infinity();
  ctx.params.v_max = ctx.params.a_max = ctx.params.delta_max =
      ctx.params.a_rate_max = ctx.params.delta_rate_max =
          std::numeric_limits<double>::infinity();
  ctx.ego_circles.radius = ego_radius;
  ctx.ego_circles.offsets = {0.0};
  ctx.obstacle_radius = obs_radius;
  ctx.obstacle_offsets = {0.0};
  ctx.obstacles.push_back({obs_pos, obs_heading});
  return ctx;
}

}  // namespace

TEST_CASE("footprint circles cover the body rectangle") {
  const FootprintCircles c = make_footprint(3, 4.8, 2.0, 0.9);
  CHECK(c.offsets.size() == 3);
  CHECK(covers_rectangle(c, 4.8, 2.0, 0.9));

  FootprintCircles too_small = c;
  too_small.radius = 0.9;  // narrower than the half width
  CHECK_FALSE(covers_rectangle(too_small, 4.8, 2.0, 0.9));

  CHECK_THROWS_AS(make_footprint(0, 4.8, 2.0, 0.9), std::invalid_argument);
  CHECK_THROWS_AS(make_footprint(3, -1.0, 2.0, 0.9), std::invalid_argument);
}

TEST_CASE("eval_constraints: collision entries") {
  AugmentedState x;  // ego at the origin

  SUBCASE("100 m apart with unit radii gives 4 - 10000") {
    const auto ctx = collision_context(1.0, 1.0, Eigen::Vector2d(100.0, 0.0));
    const Eigen::VectorXd h = eval_constraints(x, {}, ctx);
    REQUIRE(h.size() == 1);
    CHECK(h[0] == doctest::Approx(-9996.0).epsilon(1e-14));
  }

  SUBCASE("coincident centers violate by the squared radius sum") {
    const auto ctx = collision_context(1.0, 1.0, Eigen::Vector2d(0.0, 0.0));
    const Eigen::VectorXd h = eval_constraints(x, {}, ctx);
    CHECK(h[0] == doctest::Approx(4.0).epsilon(1e-14));
  }
}

TEST_CASE("eval_constraints: bound rows and ordering") {
  const ConstraintContext ctx = basic_context();
  AugmentedState x;
  x.base.v = 3.0;

  SUBCASE("acceleration at the upper bound is exactly active") {
    const ControlInput u{ctx.params.a_max, 0.0};
    const Eigen::VectorXd h = eval_constraints(x, u, ctx);
    CHECK(h[0] == 0.0);       // a - a_max
    CHECK(h[1] < 0.0);        // a_min - a
  }

  SUBCASE("row count matches the context") {
    const Eigen::VectorXd h = eval_constraints(x, ControlInput{}, ctx);
    CHECK(h.size() == ctx.num_rows());
    CHECK(h.size() == 10);  // 4 input + 4 rate + 2 speed
  }

  SUBCASE("terminal nodes drop the input rows") {
    const ConstraintContext term = basic_context(false);
    CHECK(term.num_rows() == 2);
  }

  SUBCASE("non-finite bounds drop their rows") {
    ConstraintContext ctx2 = basic_context();
    ctx2.params.a_rate_min = -std::numeric_limits<double>::infinity();
    ctx2.params.a_rate_max = std::numeric_limits<double>::infinity();
    CHECK(ctx2.num_rows() == 8);
  }
}

TEST_CASE("corridor rows bound the lateral offset") {
  ConstraintContext ctx = basic_context(false);
  ctx.params.v_min = -std::numeric_limits<double>::infinity();
  ctx.params.v_max = std::numeric_limits<double>::infinity();
  Corridor c;
  c.ref_position = Eigen::Vector2d(0.0, 0.0);
  c.ref_heading = 0.0;
  c.half_width = 2.0;
  ctx.corridor = c;

  AugmentedState x;
  x.base = VehicleState{5.0, 0.5, 0.0, 0.0};
  const Eigen::VectorXd h = eval_constraints(x, {}, ctx);
  REQUIRE(h.size() == 2);
  CHECK(h[0] == doctest::Approx(0.5 - 2.0).epsilon(1e-14));
  CHECK(h[1] == doctest::Approx(-0.5 - 2.0).epsilon(1e-14));
}

TEST_CASE("active penalty selector over the four sign cases") {
  const Eigen::Vector4d h(-1.0, -1.0, 0.5, 0.0);
  const Eigen::Vector4d lambda(0.0, 2.0, 0.0, 0.0);
  const Eigen::VectorXd diag = active_penalty_diag(h, lambda, 7.0);
  CHECK(diag[0] == 0.0);  // inactive, zero multiplier
  CHECK(diag[1] == 7.0);  // inactive but multiplier held
  CHECK(diag[2] == 7.0);  // violated
  CHECK(diag[3] == 7.0);  // on the boundary counts as active
}

TEST_CASE("augmented terms: scalar formula cases") {
  SUBCASE("all satisfied with zero multipliers contributes nothing") {
    const Eigen::VectorXd h = Eigen::Vector2d(-1.0, -0.5);
    const Eigen::VectorXd lambda = Eigen::Vector2d::Zero();
    CHECK(augmented_cost(h, lambda, 10.0) == 0.0);
    const Eigen::MatrixXd Jx = Eigen::MatrixXd::Ones(2, 6);
    const Eigen::MatrixXd Ju = Eigen::MatrixXd::Ones(2, 2);
    const AugmentedTerms terms = augmented_terms(h, lambda, 10.0, Jx, Ju);
    CHECK(terms.cost == 0.0);
    CHECK(terms.gx.cwiseAbs().maxCoeff() == 0.0);
    CHECK(terms.Hxx.cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("h = 1, lambda = 0.5, mu = 10 gives 5.5") {
    const Eigen::VectorXd h = Eigen::VectorXd::Constant(1, 1.0);
    const Eigen::VectorXd lambda = Eigen::VectorXd::Constant(1, 0.5);
    CHECK(augmented_cost(h, lambda, 10.0) ==
          doctest::Approx(5.5).epsilon(1e-15));
  }

  SUBCASE("random active/inactive mix matches the scalar recomputation") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
      const int m = 1 + static_cast<int>(oracles::uniform(rng, 0, 6.99));
      Eigen::VectorXd h(m), lambda(m);
      for (int i = 0; i < m; ++i) {
        h[i] = oracles::uniform(rng, -2, 2);
        lambda[i] = oracles::uniform01(rng) < 0.5
                        ? 0.0
                        : oracles::uniform(rng, 0, 3);
      }
      const double mu = oracles::uniform(rng, 0.1, 50);
      double expected = 0.0;
      for (int i = 0; i < m; ++i) {
        expected += lambda[i] * h[i];
        if (!(h[i] < 0.0 && lambda[i] == 0.0)) {
          expected += 0.5 * mu * h[i] * h[i];
        }
      }
      CHECK(augmented_cost(h, lambda, mu) ==
            doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("augmented gradient matches finite differences of the AL cost") {
  std::mt19937_64 rng(6);
  FootprintCircles ego = make_footprint(3, 4.8, 2.0, 0.9);
  int accepted = 0;
  while (accepted < 300) {
    ConstraintContext ctx = basic_context();
    ctx.ego_circles = ego;
    ctx.obstacle_radius = ego.radius;
    ctx.obstacle_offsets = {-1.6, 0.0, 1.6};
    ctx.obstacles.push_back({Eigen::Vector2d(oracles::uniform(rng, -8, 8),
                                             oracles::uniform(rng, -8, 8)),
                             oracles::uniform(rng, -M_PI, M_PI)});
    Corridor c;
    c.ref_position = Eigen::Vector2d(oracles::uniform(rng, -2, 2),
                                     oracles::uniform(rng, -2, 2));
    c.ref_heading = oracles::uniform(rng, -M_PI, M_PI);
    c.half_width = 2.0;
    ctx.corridor = c;

    Eigen::VectorXd xv(kStateDim);
    xv << oracles::uniform(rng, -3, 3), oracles::uniform(rng, -3, 3),
        oracles::uniform(rng, -M_PI, M_PI), oracles::uniform(rng, 0, 10),
        oracles::uniform(rng, -3, 2), oracles::uniform(rng, -0.5, 0.5);
    Eigen::Vector2d uv(oracles::uniform(rng, -4, 3),
                       oracles::uniform(rng, -0.6, 0.6));

    const AugmentedState x = state_from_vector(xv);
    const ControlInput u = input_from_vector(uv);
    const Eigen::VectorXd h = eval_constraints(x, u, ctx);

    Eigen::VectorXd lambda(h.size());
    for (Eigen::Index i = 0; i < h.size(); ++i) {
      lambda[i] =
          oracles::uniform01(rng) < 0.5 ? 0.0 : oracles::uniform(rng, 0, 2);
    }
    const double mu = oracles::uniform(rng, 0.5, 20);

    // skip points near an activation boundary, where I_mu switches
    bool near_boundary = false;
    for (Eigen::Index i = 0; i < h.size(); ++i) {
      if (std::abs(h[i]) < 1e-4 && lambda[i] == 0.0) near_boundary = true;
    }
    if (near_boundary) continue;
    ++accepted;

    Eigen::MatrixXd Jx, Ju;
    constraint_jacobians(x, u, ctx, Jx, Ju);
    const AugmentedTerms terms = augmented_terms(h, lambda, mu, Jx, Ju);

    auto al_of = [&](const Eigen::VectorXd& xx, const Eigen::Vector2d& uu) {
      const Eigen::VectorXd hh = eval_constraints(
          state_from_vector(xx), input_from_vector(uu), ctx);
      return augmented_cost(hh, lambda, mu);
    };
    const Eigen::VectorXd gx_fd = oracles::fd_gradient(
        [&](const Eigen::VectorXd& xx) { return al_of(xx, uv); }, xv);
    const Eigen::VectorXd gu_fd = oracles::fd_gradient(
        [&](const Eigen::VectorXd& uu) { return al_of(xv, uu); }, uv);

    const double sx = std::max(1.0, gx_fd.cwiseAbs().maxCoeff());
    const double su = std::max(1.0, gu_fd.cwiseAbs().maxCoeff());
    REQUIRE((terms.gx - gx_fd).cwiseAbs().maxCoeff() <= 1e-5 * sx);
    REQUIRE((terms.gu - gu_fd).cwiseAbs().maxCoeff() <= 1e-5 * su);
  }
}

TEST_CASE("constraint jacobians match finite differences") {
  std::mt19937_64 rng(61);
  FootprintCircles ego = make_footprint(3, 4.8, 2.0, 0.9);
  for (int trial = 0; trial < 200; ++trial) {
    ConstraintContext ctx = basic_context();
    ctx.ego_circles = ego;
    ctx.obstacle_radius = ego.radius;
    ctx.obstacle_offsets = {-1.6, 0.0, 1.6};
    ctx.obstacles.push_back({Eigen::Vector2d(oracles::uniform(rng, -10, 10),
                                             oracles::uniform(rng, -10, 10)),
                             oracles::uniform(rng, -M_PI, M_PI)});

    Eigen::VectorXd xv(kStateDim);
    xv << oracles::uniform(rng, -5, 5), oracles::uniform(rng, -5, 5),
        oracles::uniform(rng, -M_PI, M_PI), oracles::uniform(rng, 0, 10),
        oracles::uniform(rng, -3, 2), oracles::uniform(rng, -0.5, 0.5);
    Eigen::Vector2d uv(oracles::uniform(rng, -4, 3),
                       oracles::uniform(rng, -0.6, 0.6));

    Eigen::MatrixXd Jx, Ju;
    constraint_jacobians(state_from_vector(xv), input_from_vector(uv), ctx,
                         Jx, Ju);
    const Eigen::MatrixXd Jx_fd = oracles::fd_jacobian(
        [&](const Eigen::VectorXd& xx) {
          return eval_constraints(state_from_vector(xx),
                                  input_from_vector(uv), ctx);
        },
        xv);
    const Eigen::MatrixXd Ju_fd = oracles::fd_jacobian(
        [&](const Eigen::VectorXd& uu) {
          return eval_constraints(state_from_vector(xv),
                                  input_from_vector(Eigen::Vector2d(uu)),
                                  ctx);
        },
        uv);
    const double sx = std::max(1.0, Jx_fd.cwiseAbs().maxCoeff());
    REQUIRE((Jx - Jx_fd).cwiseAbs().maxCoeff() <= 1e-6 * sx);
    REQUIRE((Ju - Ju_fd).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("multiplier update: clamps, grows, and caps") {
  ConstraintState state;
  state.mu = 10.0;
  state.lambda = {Eigen::VectorXd(3)};
  state.h = {Eigen::VectorXd(3)};
  state.lambda[0] << 0.0, 1.0, 2.0;
  state.h[0] << -1.0, 0.2, -0.5;

  update_multipliers(state, 10.0, 1e6);
  CHECK(state.lambda[0][0] == 0.0);                      // stays inactive
  CHECK(state.lambda[0][1] == doctest::Approx(3.0));     // 1 + 10 * 0.2
  CHECK(state.lambda[0][2] == 0.0);                      // max(0, 2 - 5)
  CHECK(state.mu == doctest::Approx(100.0));

  for (int i = 0; i < 10; ++i) {
    update_multipliers(state, 10.0, 1e6);
  }
  CHECK(state.mu == doctest::Approx(1e6));

  // multipliers stay nonnegative under repeated updates
  CHECK(state.lambda[0].minCoeff() >= 0.0);
}
