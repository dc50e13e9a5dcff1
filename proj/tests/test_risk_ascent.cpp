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
#include "rbmpc/risk_ascent.hpp"

using namespace rbmpc;

namespace {

ProbabilityVector random_simplex(std::mt19937_64& rng, int d) {
  Eigen::VectorXd p(d);
  double sum = 0.0;
  for (int i = 0; i < d; ++i) {
    p[i] = 0.05 + oracles::uniform01(rng);
    sum += p[i];
  }
  p /= sum;
  return ProbabilityVector(p);
}

}  // namespace

TEST_CASE("project: points already inside come back unchanged") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 2 + static_cast<int>(oracles::uniform(rng, 0, 4.99));
    const ProbabilityVector p = random_simplex(rng, d);
    const double alpha = oracles::uniform(rng, 0.0, 0.7);
    const AmbiguitySet set(p, alpha);
    // a convex combination of p and the centroid of feasible caps stays in
    // the set; p itself is always feasible
    const ProbabilityVector q = project(set, p.values());
    CHECK((q.values() - p.values()).lpNorm<Eigen::Infinity>() <= 1e-10);
  }
}

TEST_CASE("project: alpha = 1 collapses to the nominal vector") {
  const ProbabilityVector p(Eigen::Vector4d(0.1, 0.2, 0.3, 0.4));
  const AmbiguitySet set(p, 1.0);
  std::mt19937_64 rng(12);
  for (int i = 0; i < 50; ++i) {
    Eigen::VectorXd raw(4);
    for (int k = 0; k < 4; ++k) raw[k] = oracles::uniform(rng, -3, 3);
    const ProbabilityVector q = project(set, raw);
    CHECK((q.values() - p.values()).lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("project: two-branch vertex case") {
  // d = 2, p = (0.5, 0.5), alpha = 0.5 -> box [0, 1]^2. q_raw = (2, 0)
  // projects onto the vertex (1, 0); confirmed against the active-set
  // enumeration oracle.
  const ProbabilityVector p(Eigen::Vector2d(0.5, 0.5));
  const AmbiguitySet set(p, 0.5);
  const Eigen::Vector2d raw(2.0, 0.0);
  const ProbabilityVector q = project(set, raw);
  CHECK(q[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(q[1] == doctest::Approx(0.0).epsilon(1e-12));
  const Eigen::VectorXd oracle =
      oracles::project_box_simplex(raw, set.upper());
  CHECK((q.values() - oracle).lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("project matches the active-set QP oracle on random instances") {
  std::mt19937_64 rng(13);
  const double alphas[] = {0.0, 0.3, 0.6, 1.0};
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = 2 + static_cast<int>(oracles::uniform(rng, 0, 4.99));
    const ProbabilityVector p = random_simplex(rng, d);
    const double alpha = alphas[trial % 4];
    const AmbiguitySet set(p, alpha);
    Eigen::VectorXd raw(d);
    for (int i = 0; i < d; ++i) raw[i] = oracles::uniform(rng, -2, 2);

    const ProbabilityVector q = project(set, raw);
    const Eigen::VectorXd oracle =
        oracles::project_box_simplex(raw, set.upper());
    REQUIRE((q.values() - oracle).lpNorm<Eigen::Infinity>() <= 1e-7);
  }
}

TEST_CASE("mass-surplus function is non-increasing and bracketed") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 2 + static_cast<int>(oracles::uniform(rng, 0, 4.99));
    const ProbabilityVector p = random_simplex(rng, d);
    const AmbiguitySet set(p, oracles::uniform(rng, 0.05, 1.0));
    Eigen::VectorXd raw(d);
    for (int i = 0; i < d; ++i) raw[i] = oracles::uniform(rng, -2, 2);

    auto mass_gap = [&](double phi) {
      return (raw.array() - phi)
                 .cwiseMax(0.0)
                 .cwiseMin(set.upper().array())
                 .sum() -
             1.0;
    };
    const double lo = raw.minCoeff() - 1.0;
    const double hi = raw.maxCoeff();
    CHECK(mass_gap(lo) >= -1e-12);
    CHECK(mass_gap(hi) <= 0.0);
    double prev = mass_gap(lo);
    for (int k = 1; k <= 50; ++k) {
      const double phi = lo + (hi - lo) * k / 50.0;
      const double cur = mass_gap(phi);
      CHECK(cur <= prev + 1e-12);
      prev = cur;
    }
  }
}

TEST_CASE("projection is nonexpansive") {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 300; ++trial) {
    const int d = 2 + static_cast<int>(oracles::uniform(rng, 0, 4.99));
    const ProbabilityVector p = random_simplex(rng, d);
    const AmbiguitySet set(p, oracles::uniform(rng, 0.0, 1.0));
    Eigen::VectorXd a(d), b(d);
    for (int i = 0; i < d; ++i) {
      a[i] = oracles::uniform(rng, -2, 2);
      b[i] = oracles::uniform(rng, -2, 2);
    }
    const double lhs =
        (project(set, a).values() - project(set, b).values()).norm();
    CHECK(lhs <= (a - b).norm() + 1e-9);
  }
}

TEST_CASE("ascent_step: uniform branch costs leave the centroid fixed") {
  const ProbabilityVector p(Eigen::Vector3d(1.0 / 3, 1.0 / 3, 1.0 / 3));
  const AmbiguitySet set(p, 0.0);
  const Eigen::Vector3d costs(4.0, 4.0, 4.0);
  const ProbabilityVector q =
      ascent_step(set, p, costs, /*gamma=*/0.3, /*rho_k=*/0.0);
  CHECK((q.values() - p.values()).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("ascent_step: gradient pushes mass onto the costly branch") {
  // full simplex, costs (10, 0), q = (0.5, 0.5), gamma = 0.1:
  // pre-projection point (1.5, 0.5) projects to the vertex (1, 0)
  const ProbabilityVector p(Eigen::Vector2d(0.5, 0.5));
  const AmbiguitySet set(p, 0.0);
  const ProbabilityVector q = ascent_step(
      set, p, Eigen::Vector2d(10.0, 0.0), /*gamma=*/0.1, /*rho_k=*/0.0);
  CHECK(q[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(q[1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("ascent_step: strong shrinkage drives q toward the set's min-norm point") {
  const ProbabilityVector p(Eigen::Vector3d(0.2, 0.3, 0.5));
  const AmbiguitySet set(p, 0.0);  // full simplex
  const Eigen::Vector3d costs = Eigen::Vector3d::Zero();
  ProbabilityVector q(Eigen::Vector3d(0.7, 0.2, 0.1));
  for (int k = 0; k < 200; ++k) {
    q = ascent_step(set, q, costs, /*gamma=*/1.0, /*rho_k=*/0.999);
  }
  // min-norm point of the simplex is the centroid
  for (int i = 0; i < 3; ++i) {
    CHECK(q[i] == doctest::Approx(1.0 / 3).epsilon(1e-6));
  }
}

TEST_CASE("rho schedule") {
  CHECK(rho_schedule(1.0, 0) == 1.0);
  CHECK(rho_schedule(1.0, 1) == 0.5);
  CHECK(rho_schedule(1.0, 9) == doctest::Approx(0.1));
  CHECK(rho_schedule(2.5, 4) == doctest::Approx(0.5));
}

TEST_CASE("cvar_value: closed forms at the alpha extremes") {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 2 + static_cast<int>(oracles::uniform(rng, 0, 4.99));
    const ProbabilityVector p = random_simplex(rng, d);
    Eigen::VectorXd costs(d);
    for (int i = 0; i < d; ++i) costs[i] = oracles::uniform(rng, -5, 5);

    const CvarResult exp_val = cvar_value(AmbiguitySet(p, 1.0), costs);
    CHECK(exp_val.value ==
          doctest::Approx(p.values().dot(costs)).epsilon(1e-12));

    const CvarResult worst = cvar_value(AmbiguitySet(p, 0.0), costs);
    CHECK(worst.value == doctest::Approx(costs.maxCoeff()).epsilon(1e-12));
  }
}

TEST_CASE("cvar_value: four-branch water-filling regression") {
  // p uniform 0.25, alpha = 0.6, costs (4, 3, 2, 1): caps are 5/12, the
  // two costliest branches fill to the cap, the third takes the remaining
  // 1/6: value = 4*5/12 + 3*5/12 + 2*1/6 = 3.25 (vertex-enumeration LP
  // oracle agrees).
  const ProbabilityVector p(Eigen::Vector4d(0.25, 0.25, 0.25, 0.25));
  const AmbiguitySet set(p, 0.6);
  const Eigen::Vector4d costs(4.0, 3.0, 2.0, 1.0);
  const CvarResult res = cvar_value(set, costs);
  CHECK(res.value == doctest::Approx(3.25).epsilon(1e-14));
  CHECK(res.q_star[0] == doctest::Approx(5.0 / 12).epsilon(1e-14));
  CHECK(res.q_star[1] == doctest::Approx(5.0 / 12).epsilon(1e-14));
  CHECK(res.q_star[2] == doctest::Approx(1.0 / 6).epsilon(1e-14));
  CHECK(res.q_star[3] == 0.0);
  Eigen::VectorXd oracle_q;
  const double oracle =
      oracles::max_linear_box_simplex(costs, set.upper(), &oracle_q);
  CHECK(res.value == doctest::Approx(oracle).epsilon(1e-14));
  CHECK((res.q_star.values() - oracle_q).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("cvar_value matches the LP oracle on random instances") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    const int d = 2 + static_cast<int>(oracles::uniform(rng, 0, 4.99));
    const ProbabilityVector p = random_simplex(rng, d);
    const AmbiguitySet set(p, oracles::uniform(rng, 0.0, 1.0));
    Eigen::VectorXd costs(d);
    for (int i = 0; i < d; ++i) costs[i] = oracles::uniform(rng, -10, 10);
    const double oracle = oracles::max_linear_box_simplex(costs, set.upper());
    REQUIRE(cvar_value(set, costs).value ==
            doctest::Approx(oracle).epsilon(1e-9));
  }
}

TEST_CASE("cvar ties break deterministically by branch index") {
  const ProbabilityVector p(Eigen::Vector3d(0.5, 0.25, 0.25));
  const AmbiguitySet set(p, 0.0);
  const Eigen::Vector3d costs(7.0, 7.0, 1.0);
  const CvarResult res = cvar_value(set, costs);
  CHECK(res.q_star[0] == doctest::Approx(1.0));
  CHECK(res.q_star[1] == 0.0);
}

TEST_CASE("repeated ascent at rho = 0 approaches the water-filling value") {
  std::mt19937_64 rng(18);
  for (int trial = 0; trial < 20; ++trial) {
    const ProbabilityVector p = random_simplex(rng, 3);
    const double alpha = oracles::uniform(rng, 0.1, 0.9);
    const AmbiguitySet set(p, alpha);
    Eigen::Vector3d costs;
    for (int i = 0; i < 3; ++i) costs[i] = oracles::uniform(rng, 0, 5);

    ProbabilityVector q = p;  // interior start
    const double gamma = 0.01;
    for (int k = 0; k < 10000; ++k) {
      q = ascent_step(set, q, costs, gamma, 0.0);
    }
    const double limit_value = q.values().dot(costs);
    CHECK(std::abs(limit_value - cvar_value(set, costs).value) <= 1e-4);
  }
}

TEST_CASE("cvar is non-increasing in alpha") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 2 + static_cast<int>(oracles::uniform(rng, 0, 4.99));
    const ProbabilityVector p = random_simplex(rng, d);
    Eigen::VectorXd costs(d);
    for (int i = 0; i < d; ++i) costs[i] = oracles::uniform(rng, -5, 5);
    double prev = std::numeric_limits<double>::infinity();
    for (double alpha : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
      const double v = cvar_value(AmbiguitySet(p, alpha), costs).value;
      CHECK(v <= prev + 1e-12);
      prev = v;
    }
  }
}

TEST_CASE("inner max is positively homogeneous at rho = 0") {
  std::mt19937_64 rng(20);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 2 + static_cast<int>(oracles::uniform(rng, 0, 4.99));
    const ProbabilityVector p = random_simplex(rng, d);
    const AmbiguitySet set(p, oracles::uniform(rng, 0.0, 1.0));
    Eigen::VectorXd costs(d);
    for (int i = 0; i < d; ++i) costs[i] = oracles::uniform(rng, -5, 5);
    const double c = oracles::uniform(rng, 0.1, 10.0);

    const CvarResult base = cvar_value(set, costs);
    const CvarResult scaled = cvar_value(set, (c * costs).eval());
    CHECK(scaled.value == doctest::Approx(c * base.value).epsilon(1e-10));
    CHECK((scaled.q_star.values() - base.q_star.values())
              .lpNorm<Eigen::Infinity>() <= 1e-12);
  }
}

TEST_CASE("ambiguity set construction rejects bad alpha") {
  const ProbabilityVector p(Eigen::Vector2d(0.5, 0.5));
  CHECK_THROWS_AS(AmbiguitySet(p, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(AmbiguitySet(p, 1.1), std::invalid_argument);
  const AmbiguitySet s0(p, 0.0);
  CHECK(s0.upper()[0] == 1.0);  // alpha = 0 cap representation
}
