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

#include "rbmpc/constraint_model.hpp"

#include <cmath>
#include <stdexcept>

namespace rbmpc {

std::vector<Eigen::Vector2d> FootprintCircles::centers(
    const Eigen::Vector2d& position, double heading) const {
  const Eigen::Vector2d dir(std::cos(heading), std::sin(heading));
  std::vector<Eigen::Vector2d> out;
  out.reserve(offsets.size());
  for (double off : offsets) {
    out.push_back(position + off * dir);
  }
  return out;
}

bool covers_rectangle(const FootprintCircles& circles, double length,
                      double width, double rear_overhang) {
  // Sample the rectangle boundary in the footprint frame (x along heading).
  const double x0 = -rear_overhang;
  const double x1 = length - rear_overhang;
  const double y = width / 2.0;
  const int n = 200;
  auto covered = [&](double px, double py) {
    for (double off : circles.offsets) {
      const double dx = px - off;
      if (dx * dx + py * py <= circles.radius * circles.radius + 1e-12) {
        return true;
      }
    }
    return false;
  };
  for (int i = 0; i <= n; ++i) {
    const double px = x0 + (x1 - x0) * i / n;
    if (!covered(px, y) || !covered(px, -y)) return false;
  }
  for (int i = 0; i <= n; ++i) {
    const double py = -y + width * i / n;
    if (!covered(x0, py) || !covered(x1, py)) return false;
  }
  return true;
}

FootprintCircles make_footprint(int n_circles, double length, double width,
                                double rear_overhang) {
  if (n_circles < 1 || !(length > 0.0) || !(width > 0.0)) {
    throw std::invalid_argument("make_footprint: bad footprint geometry");
  }
  FootprintCircles circles;
  const double seg = length / n_circles;
  circles.radius = std::hypot(seg / 2.0, width / 2.0) + 1e-9;
  circles.offsets.reserve(n_circles);
  for (int k = 0; k < n_circles; ++k) {
    circles.offsets.push_back(-rear_overhang + (k + 0.5) * seg);
  }
  if (!covers_rectangle(circles, length, width, rear_overhang)) {
    throw std::invalid_argument("make_footprint: circles do not cover body");
  }
  return circles;
}

namespace {

struct RowWriter {
  Eigen::VectorXd* h{nullptr};
  Eigen::MatrixXd* Jx{nullptr};
  Eigen::MatrixXd* Ju{nullptr};
  int row{0};

  void value(double v) {
    if (h != nullptr) (*h)[row] = v;
  }
  void dx(int col, double v) {
    if (Jx != nullptr) (*Jx)(row, col) = v;
  }
  void du(int col, double v) {
    if (Ju != nullptr) (*Ju)(row, col) = v;
  }
  void next() { ++row; }
};

// Single walk over the constraint rows shared by eval and the Jacobians so
// the ordering cannot drift apart.
void walk_constraints(const AugmentedState& x, const ControlInput& u,
                      const ConstraintContext& ctx, RowWriter& w) {
  const BicycleParams& p = ctx.params;

  if (ctx.with_input) {
    if (std::isfinite(p.a_max)) {
      w.value(u.a - p.a_max);
      w.du(0, 1.0);
      w.next();
    }
    if (std::isfinite(p.a_min)) {
      w.value(p.a_min - u.a);
      w.du(0, -1.0);
      w.next();
    }
    if (std::isfinite(p.delta_max)) {
      w.value(u.delta - p.delta_max);
      w.du(1, 1.0);
      w.next();
    }
    if (std::isfinite(p.delta_min)) {
      w.value(p.delta_min - u.delta);
      w.du(1, -1.0);
      w.next();
    }

    const double inv_dt = 1.0 / p.dt;
    const double a_rate = (u.a - x.prev_control.a) * inv_dt;
    const double d_rate = (u.delta - x.prev_control.delta) * inv_dt;
    if (std::isfinite(p.a_rate_max)) {
      w.value(a_rate - p.a_rate_max);
      w.du(0, inv_dt);
      w.dx(4, -inv_dt);
      w.next();
    }
    if (std::isfinite(p.a_rate_min)) {
      w.value(p.a_rate_min - a_rate);
      w.du(0, -inv_dt);
      w.dx(4, inv_dt);
      w.next();
    }
    if (std::isfinite(p.delta_rate_max)) {
      w.value(d_rate - p.delta_rate_max);
      w.du(1, inv_dt);
      w.dx(5, -inv_dt);
      w.next();
    }
    if (std::isfinite(p.delta_rate_min)) {
      w.value(p.delta_rate_min - d_rate);
      w.du(1, -inv_dt);
      w.dx(5, inv_dt);
      w.next();
    }
  }

  if (std::isfinite(p.v_max)) {
    w.value(x.base.v - p.v_max);
    w.dx(3, 1.0);
    w.next();
  }
  if (std::isfinite(p.v_min)) {
    w.value(p.v_min - x.base.v);
    w.dx(3, -1.0);
    w.next();
  }

  if (!ctx.obstacles.empty() && !ctx.ego_circles.offsets.empty() &&
      !ctx.obstacle_offsets.empty()) {
    const double cth = std::cos(x.base.theta);
    const double sth = std::sin(x.base.theta);
    const double r_sum = ctx.ego_circles.radius + ctx.obstacle_radius;
    const double r_sum2 = r_sum * r_sum;
    for (const auto& obs : ctx.obstacles) {
      const Eigen::Vector2d obs_dir(std::cos(obs.heading),
                                    std::sin(obs.heading));
      for (double ego_off : ctx.ego_circles.offsets) {
        const Eigen::Vector2d c_ego(x.base.px + ego_off * cth,
                                    x.base.py + ego_off * sth);
        for (double obs_off : ctx.obstacle_offsets) {
          const Eigen::Vector2d diff =
              c_ego - (obs.position + obs_off * obs_dir);
          w.value(r_sum2 - diff.squaredNorm());
          w.dx(0, -2.0 * diff.x());
          w.dx(1, -2.0 * diff.y());
          w.dx(2, -2.0 * ego_off * (-sth * diff.x() + cth * diff.y()));
          w.next();
        }
      }
    }
  }

  if (ctx.corridor.has_value() && std::isfinite(ctx.corridor->half_width)) {
    const Corridor& c = *ctx.corridor;
    const double nx = -std::sin(c.ref_heading);
    const double ny = std::cos(c.ref_heading);
    const double lat = nx * (x.base.px - c.ref_position.x()) +
                       ny * (x.base.py - c.ref_position.y());
    w.value(lat - c.half_width);
    w.dx(0, nx);
    w.dx(1, ny);
    w.next();
    w.value(-lat - c.half_width);
    w.dx(0, -nx);
    w.dx(1, -ny);
    w.next();
  }
}

}  // namespace

int ConstraintContext::num_rows() const {
  int n = 0;
  if (with_input) {
    n += std::isfinite(params.a_max) + std::isfinite(params.a_min) +
         std::isfinite(params.delta_max) + std::isfinite(params.delta_min) +
         std::isfinite(params.a_rate_max) + std::isfinite(params.a_rate_min) +
         std::isfinite(params.delta_rate_max) +
         std::isfinite(params.delta_rate_min);
  }
  n += std::isfinite(params.v_max) + std::isfinite(params.v_min);
  if (!obstacles.empty() && !ego_circles.offsets.empty() &&
      !obstacle_offsets.empty()) {
    n += static_cast<int>(obstacles.size() * ego_circles.offsets.size() *
                          obstacle_offsets.size());
  }
  if (corridor.has_value() && std::isfinite(corridor->half_width)) {
    n += 2;
  }
  return n;
}

Eigen::VectorXd eval_constraints(const AugmentedState& x,
                                 const ControlInput& u,
                                 const ConstraintContext& ctx) {
  Eigen::VectorXd h = Eigen::VectorXd::Zero(ctx.num_rows());
  RowWriter w;
  w.h = &h;
  walk_constraints(x, u, ctx, w);
  return h;
}

void constraint_jacobians(const AugmentedState& x, const ControlInput& u,
                          const ConstraintContext& ctx, Eigen::MatrixXd& Jx,
                          Eigen::MatrixXd& Ju) {
  const int n = ctx.num_rows();
  Jx = Eigen::MatrixXd::Zero(n, kStateDim);
  Ju = Eigen::MatrixXd::Zero(n, kInputDim);
  RowWriter w;
  w.Jx = &Jx;
  w.Ju = &Ju;
  walk_constraints(x, u, ctx, w);
}

Eigen::VectorXd active_penalty_diag(const Eigen::VectorXd& h,
                                    const Eigen::VectorXd& lambda, double mu) {
  Eigen::VectorXd diag(h.size());
  for (Eigen::Index m = 0; m < h.size(); ++m) {
    diag[m] = (h[m] < 0.0 && lambda[m] == 0.0) ? 0.0 : mu;
  }
  return diag;
}

double augmented_cost(const Eigen::VectorXd& h, const Eigen::VectorXd& lambda,
                      double mu) {
  double cost = lambda.dot(h);
  for (Eigen::Index m = 0; m < h.size(); ++m) {
    if (!(h[m] < 0.0 && lambda[m] == 0.0)) {
      cost += 0.5 * mu * h[m] * h[m];
    }
  }
  return cost;
}

AugmentedTerms augmented_terms(const Eigen::VectorXd& h,
                               const Eigen::VectorXd& lambda, double mu,
                               const Eigen::MatrixXd& Jx,
                               const Eigen::MatrixXd& Ju) {
  const Eigen::VectorXd imu = active_penalty_diag(h, lambda, mu);
  const Eigen::VectorXd w = lambda + imu.cwiseProduct(h);

  AugmentedTerms out;
  out.cost = lambda.dot(h) + 0.5 * h.dot(imu.cwiseProduct(h));
  out.gx = Jx.transpose() * w;
  out.gu = Ju.transpose() * w;
  const Eigen::MatrixXd JxI = Jx.transpose() * imu.asDiagonal();
  out.Hxx = JxI * Jx;
  out.Hxu = JxI * Ju;
  out.Huu = Ju.transpose() * imu.asDiagonal() * Ju;
  return out;
}

void update_multipliers(ConstraintState& state, double mu_scale,
                        double mu_max) {
  for (std::size_t n = 0; n < state.lambda.size(); ++n) {
    state.lambda[n] =
        (state.lambda[n] + state.mu * state.h[n]).cwiseMax(0.0);
  }
  state.mu = std::min(state.mu * mu_scale, mu_max);
}

}  // namespace rbmpc
