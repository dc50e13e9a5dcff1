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

#include "rbmpc/polyline.hpp"

#include <cmath>
#include <stdexcept>

namespace rbmpc {

Polyline::Polyline(std::vector<Eigen::Vector2d> points)
    : points_(std::move(points)) {
  if (points_.size() < 2) {
    throw std::invalid_argument("Polyline: need at least two points");
  }
  cum_.resize(points_.size());
  cum_[0] = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i) {
    cum_[i] = cum_[i - 1] + (points_[i] - points_[i - 1]).norm();
  }
}

double Polyline::project(const Eigen::Vector2d& point) const {
  double best_s = 0.0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
    const Eigen::Vector2d a = points_[i];
    const Eigen::Vector2d ab = points_[i + 1] - a;
    const double len2 = ab.squaredNorm();
    double u = len2 > 0.0 ? (point - a).dot(ab) / len2 : 0.0;
    u = std::clamp(u, 0.0, 1.0);
    const Eigen::Vector2d proj = a + u * ab;
    const double d2 = (point - proj).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best_s = cum_[i] + u * std::sqrt(len2);
    }
  }
  return best_s;
}

Eigen::Vector2d Polyline::point_at(double s) const {
  if (s <= 0.0) {
    const Eigen::Vector2d dir = (points_[1] - points_[0]).normalized();
    return points_[0] + s * dir;
  }
  if (s >= cum_.back()) {
    const std::size_t n = points_.size();
    const Eigen::Vector2d dir = (points_[n - 1] - points_[n - 2]).normalized();
    return points_[n - 1] + (s - cum_.back()) * dir;
  }
  std::size_t i = 1;
  while (cum_[i] < s) ++i;
  const double seg = cum_[i] - cum_[i - 1];
  const double u = seg > 0.0 ? (s - cum_[i - 1]) / seg : 0.0;
  return points_[i - 1] + u * (points_[i] - points_[i - 1]);
}

double Polyline::heading_at(double s) const {
  std::size_t i = 1;
  if (s >= cum_.back()) {
    i = points_.size() - 1;
  } else {
    while (cum_[i] < s) ++i;
  }
  const Eigen::Vector2d dir = points_[i] - points_[i - 1];
  return std::atan2(dir.y(), dir.x());
}

std::vector<Eigen::Vector2d> sample_arc_path(const Eigen::Vector2d& start,
                                             double start_heading,
                                             double straight_before,
                                             double turn_radius,
                                             double turn_angle,
                                             double straight_after,
                                             double ds) {
  std::vector<Eigen::Vector2d> pts;
  Eigen::Vector2d pos = start;
  double heading = start_heading;
  pts.push_back(pos);

  auto push_straight = [&](double dist) {
    const Eigen::Vector2d dir(std::cos(heading), std::sin(heading));
    const int n = std::max(1, static_cast<int>(std::ceil(dist / ds)));
    for (int i = 1; i <= n; ++i) {
      pts.push_back(pos + dir * (dist * i / n));
    }
    pos = pts.back();
  };

  if (straight_before > 0.0) {
    push_straight(straight_before);
  }
  if (turn_radius > 0.0 && turn_angle != 0.0) {
    const double side = turn_angle > 0.0 ? 1.0 : -1.0;
    const Eigen::Vector2d normal(-std::sin(heading), std::cos(heading));
    const Eigen::Vector2d center = pos + side * turn_radius * normal;
    const double arc_len = turn_radius * std::abs(turn_angle);
    const int n = std::max(2, static_cast<int>(std::ceil(arc_len / ds)));
    const double phi0 = std::atan2(pos.y() - center.y(), pos.x() - center.x());
    for (int i = 1; i <= n; ++i) {
      const double phi = phi0 + turn_angle * i / n;
      pts.push_back(center + turn_radius * Eigen::Vector2d(std::cos(phi),
                                                           std::sin(phi)));
    }
    pos = pts.back();
    heading += turn_angle;
  }
  if (straight_after > 0.0) {
    push_straight(straight_after);
  }
  return pts;
}

}  // namespace rbmpc
