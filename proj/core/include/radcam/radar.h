/* Copyright 2026 The Radcam Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef RADCAM_RADAR_H_
#define RADCAM_RADAR_H_

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "radcam/autodiff.h"
#include "radcam/geometry.h"
#include "radcam/mlp.h"

namespace radcam {

struct RadarPoint {
  Vec3 position = Vec3::Zero();  // meters, ego frame
  double rcs = 0;                // dBsm
  Vec2 velocity = Vec2::Zero();  // m/s, ego-motion compensated
  double sweep_age = 0;          // seconds
};

struct RadarSweep {
  std::vector<RadarPoint> points;
  RigidTransform ego_pose;  // sweep frame -> current frame
  double timestamp = 0;
};

constexpr int kDefaultMaxSweeps = 7;

// Brings every sweep into the current ego frame. Output is ordered newest
// sweep first, original point order within a sweep.
std::vector<RadarPoint> AccumulateSweeps(std::span<const RadarSweep> sweeps, double current_time,
                                         int max_sweeps = kDefaultMaxSweeps);

struct RadarFilterConfig {
  double x_min = -std::numeric_limits<double>::infinity();
  double x_max = std::numeric_limits<double>::infinity();
  double y_min = -std::numeric_limits<double>::infinity();
  double y_max = std::numeric_limits<double>::infinity();
  double max_speed = std::numeric_limits<double>::infinity();
  double min_rcs = -std::numeric_limits<double>::infinity();

  // Grid extent with the default 50 m/s speed and -10 dBsm RCS cuts.
  static RadarFilterConfig ForGrid(const BevGridSpec& spec, double max_speed = 50.0,
                                   double min_rcs = -10.0);
  bool Keeps(const RadarPoint& p) const;
};

std::vector<RadarPoint> FilterPoints(std::span<const RadarPoint> points,
                                     const RadarFilterConfig& config);

// Per-point pillar input: x, y, z, rcs, vx, vy, sweep age, and the offset to
// the owning cell center. Each attribute is divided by a fixed scale so the
// encoder sees O(1) inputs.
constexpr int kPointFeatureWidth = 9;
std::vector<double> PointFeatures(const RadarPoint& p, const BevGridSpec& spec, const BevCell& cell);

struct PillarEncoderParams {
  MlpParams point_mlp;  // 9 -> C
  Tensor conv1_weight, conv1_bias;
  Tensor conv2_weight, conv2_bias;

  void AppendTo(ParamList& list, const std::string& prefix);
};

PillarEncoderParams MakePillarEncoder(int channels, Rng& rng);

// Scatters points into BEV cells, max-pools per cell, then runs two 3x3
// conv + relu layers. Returns F_R as [H x W x C].
Var Pillarize(ParamBinder& bind, std::span<const RadarPoint> points, const BevGridSpec& spec,
              const PillarEncoderParams& params);
Tensor Pillarize(std::span<const RadarPoint> points, const BevGridSpec& spec,
                 const PillarEncoderParams& params);

}  // namespace radcam

#endif  // RADCAM_RADAR_H_
