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

#include <Eigen/Core>

#include "rbmpc/types.hpp"

namespace rbmpc {

/// CVaR ambiguity set at level alpha about a nominal probability vector p:
/// the simplex intersected with the box 0 <= q_i <= p_i / alpha. alpha = 1
/// collapses the set to {p}; alpha = 0 yields the whole simplex (the box
/// upper bound is then 1, which the simplex implies anyway).
class AmbiguitySet {
 public:
  AmbiguitySet(ProbabilityVector p, double alpha);

  const ProbabilityVector& nominal() const { return p_; }
  double alpha() const { return alpha_; }
  int size() const { return p_.size(); }
  /// Per-branch box caps p_i / alpha (1 when alpha = 0).
  const Eigen::VectorXd& upper() const { return upper_; }

 private:
  ProbabilityVector p_;
  double alpha_;
  Eigen::VectorXd upper_;
};

/// Euclidean projection onto the ambiguity set: a box clamp at the shifted
/// point q_raw - phi* 1, where phi* is located by bisection on the mass
/// surplus m(phi) = 1'clamp(q_raw - phi 1) - 1, which is non-increasing in
/// phi. The bracket [min(q_raw) - 1, max(q_raw)] always contains a root.
ProbabilityVector project(const AmbiguitySet& set,
                          const Eigen::VectorXd& q_raw);

/// One regularized projected gradient ascent step:
///   q+ = proj((1 - gamma rho_k) q + gamma branch_costs).
ProbabilityVector ascent_step(const AmbiguitySet& set,
                              const ProbabilityVector& q,
                              const Eigen::VectorXd& branch_costs,
                              double gamma, double rho_k);

/// Diminishing regularization weight rho0 / (k + 1).
double rho_schedule(double rho0, int k);

struct CvarResult {
  double value{0.0};
  ProbabilityVector q_star;
};

/// Exact maximum of q'branch_costs over the ambiguity set via greedy
/// water-filling: descending cost order (ties by branch index), each branch
/// takes its cap until the unit mass runs out.
CvarResult cvar_value(const AmbiguitySet& set,
                      const Eigen::VectorXd& branch_costs);

}  // namespace rbmpc
