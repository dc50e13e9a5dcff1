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
#include <vector>

namespace rbmpc {

/// Piecewise-linear path with arclength parameterization. Queries past the
/// ends extrapolate along the first/last segment.
class Polyline {
 public:
  Polyline() = default;
  explicit Polyline(std::vector<Eigen::Vector2d> points);

  double length() const { return cum_.empty() ? 0.0 : cum_.back(); }
  int size() const { return static_cast<int>(points_.size()); }
  const std::vector<Eigen::Vector2d>& points() const { return points_; }

  /// Arclength of the closest point on the path.
  double project(const Eigen::Vector2d& point) const;
  Eigen::Vector2d point_at(double s) const;
  double heading_at(double s) const;

 private:
  std::vector<Eigen::Vector2d> points_;
  std::vector<double> cum_;
};

/// Quarter-arc left/right turn helper used by the intersection scenarios:
/// straight run-in, circular arc, straight run-out, sampled every `ds`.
std::vector<Eigen::Vector2d> sample_arc_path(const Eigen::Vector2d& start,
                                             double start_heading,
                                             double straight_before,
                                             double turn_radius,
                                             double turn_angle,
                                             double straight_after,
                                             double ds = 0.5);

}  // namespace rbmpc
