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

#include "radcam/radar.h"

#include <algorithm>
#include <numeric>

namespace radcam {

std::vector<RadarPoint> AccumulateSweeps(std::span<const RadarSweep> sweeps, double current_time,
                                         int max_sweeps) {
  if (static_cast<int>(sweeps.size()) > max_sweeps) {
    throw DataError("got " + std::to_string(sweeps.size()) + " radar sweeps, at most " +
                    std::to_string(max_sweeps) + " allowed");
  }
  std::vector<int> order(sweeps.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return sweeps[a].timestamp > sweeps[b].timestamp; });
  std::vector<RadarPoint> out;
  for (int idx : order) {
    const RadarSweep& sweep = sweeps[idx];
    sweep.ego_pose.Validate();
    const double age = current_time - sweep.timestamp;
    for (const RadarPoint& p : sweep.points) {
      RadarPoint q = p;
      q.position = sweep.ego_pose.Apply(p.position);
      const Vec3 v = sweep.ego_pose.Rotate(Vec3(p.velocity.x(), p.velocity.y(), 0.0));
      q.velocity = Vec2(v.x(), v.y());
      q.sweep_age = age;
      out.push_back(q);
    }
  }
  return out;
}

RadarFilterConfig RadarFilterConfig::ForGrid(const BevGridSpec& spec, double max_speed,
                                             double min_rcs) {
  RadarFilterConfig c;
  c.x_min = spec.x_min;
  c.x_max = spec.x_max;
  c.y_min = spec.y_min;
  c.y_max = spec.y_max;
  c.max_speed = max_speed;
  c.min_rcs = min_rcs;
  return c;
}

bool RadarFilterConfig::Keeps(const RadarPoint& p) const {
  const double x = p.position.x(), y = p.position.y();
  // Half-open like the BEV cells, so every kept point owns a cell.
  const bool in_x = x >= x_min && (x < x_max || x_max == std::numeric_limits<double>::infinity());
  const bool in_y = y >= y_min && (y < y_max || y_max == std::numeric_limits<double>::infinity());
  return in_x && in_y && p.velocity.norm() <= max_speed && p.rcs >= min_rcs;
}

std::vector<RadarPoint> FilterPoints(std::span<const RadarPoint> points,
                                     const RadarFilterConfig& config) {
  std::vector<RadarPoint> out;
  std::copy_if(points.begin(), points.end(), std::back_inserter(out),
               [&](const RadarPoint& p) { return config.Keeps(p); });
  return out;
}

std::vector<double> PointFeatures(const RadarPoint& p, const BevGridSpec& spec,
                                  const BevCell& cell) {
  constexpr double kPositionScale = 10.0, kRcsScale = 10.0, kSpeedScale = 10.0, kAgeScale = 0.5;
  const Vec2 center = spec.CellCenter(cell.row, cell.col);
  return {p.position.x() / kPositionScale,
          p.position.y() / kPositionScale,
          p.position.z() / kPositionScale,
          p.rcs / kRcsScale,
          p.velocity.x() / kSpeedScale,
          p.velocity.y() / kSpeedScale,
          p.sweep_age / kAgeScale,
          (p.position.x() - center.x()) / spec.resolution,
          (p.position.y() - center.y()) / spec.resolution};
}

void PillarEncoderParams::AppendTo(ParamList& list, const std::string& prefix) {
  AppendParams(list, prefix + ".point_mlp", point_mlp);
  list.emplace_back(prefix + ".conv1.weight", &conv1_weight);
  list.emplace_back(prefix + ".conv1.bias", &conv1_bias);
  list.emplace_back(prefix + ".conv2.weight", &conv2_weight);
  list.emplace_back(prefix + ".conv2.bias", &conv2_bias);
}

PillarEncoderParams MakePillarEncoder(int channels, Rng& rng) {
  PillarEncoderParams p;
  p.point_mlp = MakeMlp({kPointFeatureWidth, channels}, Activation::kRelu, rng);
  p.conv1_weight = MakeConvWeight(channels, channels, rng);
  p.conv1_bias = Tensor({channels});
  p.conv2_weight = MakeConvWeight(channels, channels, rng);
  p.conv2_bias = Tensor({channels});
  return p;
}

Var Pillarize(ParamBinder& bind, std::span<const RadarPoint> points, const BevGridSpec& spec,
              const PillarEncoderParams& params) {
  params.point_mlp.Validate();
  if (params.point_mlp.in_width() != kPointFeatureWidth) {
    throw ShapeError("pillar point mlp expects " + std::to_string(kPointFeatureWidth) +
                     " inputs, has " + std::to_string(params.point_mlp.in_width()));
  }
  const int rows = spec.rows(), cols = spec.cols();
  const int channels = params.point_mlp.out_width();
  Tape& tape = bind.tape();
  std::vector<double> feats;
  std::vector<int> cell_ids;
  for (const RadarPoint& p : points) {
    auto cell = BevCellOf(p.position.head<2>(), spec);
    if (!cell) continue;
    auto f = PointFeatures(p, spec, *cell);
    feats.insert(feats.end(), f.begin(), f.end());
    cell_ids.push_back(cell->row * cols + cell->col);
  }
  Var grid;
  if (cell_ids.empty()) {
    grid = tape.Constant(Tensor({rows * cols, channels}));
  } else {
    const int n = static_cast<int>(cell_ids.size());
    Var x = tape.Constant(Tensor({n, kPointFeatureWidth}, std::move(feats)));
    Var emb = MlpForward(bind, params.point_mlp, x);
    grid = ops::SegmentMax(emb, cell_ids, rows * cols);
  }
  Var h = ops::Reshape(grid, {rows, cols, channels});
  h = ops::Relu(ops::Conv3x3(h, bind(params.conv1_weight), bind(params.conv1_bias)));
  h = ops::Relu(ops::Conv3x3(h, bind(params.conv2_weight), bind(params.conv2_bias)));
  return h;
}

Tensor Pillarize(std::span<const RadarPoint> points, const BevGridSpec& spec,
                 const PillarEncoderParams& params) {
  Tape tape;
  tape.set_grad_enabled(false);
  ParamBinder bind(tape);
  return Pillarize(bind, points, spec, params).value();
}

}  // namespace radcam
