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

#include "rbmpc/risk_ascent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rbmpc {

namespace {
constexpr double kGapTol = 1e-10;       // |m(phi)| target
constexpr double kIntervalTol = 1e-12;  // bisection interval target
}  // namespace

AmbiguitySet::AmbiguitySet(ProbabilityVector p, double alpha)
    : p_(std::move(p)), alpha_(alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("AmbiguitySet: alpha outside [0, 1]");
  }
  upper_.resize(p_.size());
  for (int i = 0; i < p_.size(); ++i) {
    upper_[i] = alpha_ > 0.0 ? p_[i] / alpha_ : 1.0;
  }
}

ProbabilityVector project(const AmbiguitySet& set,
                          const Eigen::VectorXd& q_raw) {
  const int d = set.size();
  if (q_raw.size() != d) {
    throw std::invalid_argument("project: dimension mismatch");
  }
  if (set.alpha() == 1.0) {
    return set.nominal();  // the set is the singleton {p}
  }
  const Eigen::VectorXd& upper = set.upper();

  auto clamped = [&](double phi) {
    return (q_raw.array() - phi).cwiseMax(0.0).cwiseMin(upper.array());
  };
  auto mass_gap = [&](double phi) { return clamped(phi).sum() - 1.0; };

  double lo = q_raw.minCoeff() - 1.0;  // m(lo) >= 0
  double hi = q_raw.maxCoeff();        // m(hi) = -1
  double phi = lo;
  for (int it = 0; it < 200 && (hi - lo) > kIntervalTol; ++it) {
    phi = 0.5 * (lo + hi);
    const double gap = mass_gap(phi);
    if (std::abs(gap) <= kGapTol) {
      break;
    }
    if (gap > 0.0) {
      lo = phi;
    } else {
      hi = phi;
    }
  }

  Eigen::VectorXd q = clamped(phi);

  // Final renormalizing clamp: spread the residual bisection mass over the
  // coordinates that have room, then clamp once more.
  const double residual = 1.0 - q.sum();
  if (residual != 0.0) {
    int room = 0;
    for (int i = 0; i < d; ++i) {
      const bool can_grow = residual > 0.0 && q[i] < upper[i];
      const bool can_shrink = residual < 0.0 && q[i] > 0.0;
      if (can_grow || can_shrink) ++room;
    }
    if (room > 0) {
      const double share = residual / room;
      for (int i = 0; i < d; ++i) {
        const bool can_grow = residual > 0.0 && q[i] < upper[i];
        const bool can_shrink = residual < 0.0 && q[i] > 0.0;
        if (can_grow || can_shrink) {
          q[i] = std::clamp(q[i] + share, 0.0, upper[i]);
        }
      }
    }
  }
  return ProbabilityVector(q);
}

ProbabilityVector ascent_step(const AmbiguitySet& set,
                              const ProbabilityVector& q,
                              const Eigen::VectorXd& branch_costs,
                              double gamma, double rho_k) {
  if (branch_costs.size() != set.size() || q.size() != set.size()) {
    throw std::invalid_argument("ascent_step: dimension mismatch");
  }
  const Eigen::VectorXd z =
      (1.0 - gamma * rho_k) * q.values() + gamma * branch_costs;
  return project(set, z);
}

double rho_schedule(double rho0, int k) { return rho0 / (k + 1); }

CvarResult cvar_value(const AmbiguitySet& set,
                      const Eigen::VectorXd& branch_costs) {
  const int d = set.size();
  if (branch_costs.size() != d) {
    throw std::invalid_argument("cvar_value: dimension mismatch");
  }
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (branch_costs[a] != branch_costs[b]) {
      return branch_costs[a] > branch_costs[b];
    }
    return a < b;
  });

  Eigen::VectorXd q = Eigen::VectorXd::Zero(d);
  double remaining = 1.0;
  for (int i : order) {
    if (remaining <= 0.0) break;
    q[i] = std::min(set.upper()[i], remaining);
    remaining -= q[i];
  }

  CvarResult out;
  out.value = q.dot(branch_costs);
  out.q_star = ProbabilityVector(q);
  return out;
}

}  // namespace rbmpc
