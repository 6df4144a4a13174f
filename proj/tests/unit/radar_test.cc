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

#include <gtest/gtest.h>

#include <algorithm>
#include <vector>

#include "radcam/radar.h"
#include "radcam/random.h"
#include "reference.h"

namespace radcam {
namespace {

RadarPoint Point(double x, double y, double rcs = 5.0, Vec2 v = Vec2::Zero()) {
  RadarPoint p;
  p.position = Vec3(x, y, 0.5);
  p.rcs = rcs;
  p.velocity = v;
  return p;
}

TEST(Accumulate, IdentityPoseKeepsPoints) {
  RadarSweep s;
  s.points = {Point(1, 2, 3, Vec2(4, 5)), Point(-1, 0)};
  s.timestamp = 1.0;
  const auto out = AccumulateSweeps(std::vector<RadarSweep>{s}, 1.0);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].position, s.points[0].position);
  EXPECT_EQ(out[0].velocity, s.points[0].velocity);
  EXPECT_EQ(out[0].sweep_age, 0.0);
}

TEST(Accumulate, TranslationShiftsPositionsNotVelocities) {
  RadarSweep s;
  s.points = {Point(1, 2, 3, Vec2(4, 5))};
  s.ego_pose = RigidTransform::FromYawTranslation(0.0, Vec3(-2, 0, 0));
  s.timestamp = 0.9;
  const auto out = AccumulateSweeps(std::vector<RadarSweep>{s}, 1.0);
  EXPECT_LT((out[0].position - Vec3(-1, 2, 0.5)).norm(), 1e-12);
  EXPECT_EQ(out[0].velocity, Vec2(4, 5));
  EXPECT_NEAR(out[0].sweep_age, 0.1, 1e-12);
}

TEST(Accumulate, RotationTurnsVelocity) {
  RadarSweep s;
  s.points = {Point(1, 0, 3, Vec2(1, 0))};
  s.ego_pose = RigidTransform::FromYawTranslation(kPi / 2, Vec3::Zero());
  const auto out = AccumulateSweeps(std::vector<RadarSweep>{s}, 0.0);
  EXPECT_LT((out[0].position - Vec3(0, 1, 0.5)).norm(), 1e-12);
  EXPECT_LT((out[0].velocity - Vec2(0, 1)).norm(), 1e-12);
}

TEST(Accumulate, SevenSweepsOfTenNewestFirst) {
  std::vector<RadarSweep> sweeps;
  for (int i = 0; i < 7; ++i) {
    RadarSweep s;
    s.timestamp = 0.1 * i;
    for (int j = 0; j < 10; ++j) s.points.push_back(Point(i, j));
    sweeps.push_back(s);
  }
  std::swap(sweeps[1], sweeps[5]);
  const auto out = AccumulateSweeps(sweeps, 0.6);
  ASSERT_EQ(out.size(), 70u);
  for (int k = 0; k < 70; ++k) {
    EXPECT_EQ(out[k].position.x(), 6 - k / 10);
    EXPECT_EQ(out[k].position.y(), k % 10);
  }
  EXPECT_TRUE(std::is_sorted(out.begin(), out.end(), [](const RadarPoint& a, const RadarPoint& b) {
    return a.sweep_age < b.sweep_age;
  }));
}

TEST(Accumulate, TooManySweepsThrows) {
  std::vector<RadarSweep> sweeps(8);
  EXPECT_THROW(AccumulateSweeps(sweeps, 0.0), DataError);
  EXPECT_NO_THROW(AccumulateSweeps(sweeps, 0.0, 8));
}

TEST(Filter, DropsOutOfRangeFastAndWeak) {
  BevGridSpec spec;
  spec.x_min = -10, spec.x_max = 10, spec.y_min = -10, spec.y_max = 10, spec.resolution = 1;
  const auto cfg = RadarFilterConfig::ForGrid(spec);
  const std::vector<RadarPoint> pts = {Point(0, 0), Point(10, 0), Point(-10, -10),
                                       Point(0, 0, -11), Point(0, 0, 5, Vec2(50, 0)),
                                       Point(0, 0, 5, Vec2(50.1, 0))};
  const auto kept = FilterPoints(pts, cfg);
  ASSERT_EQ(kept.size(), 3u);
  EXPECT_EQ(kept[1].position.x(), -10);
  EXPECT_EQ(kept[2].velocity.x(), 50);
}

BevGridSpec SmallGrid() {
  BevGridSpec s;
  s.x_min = -4, s.x_max = 4, s.y_min = -4, s.y_max = 4, s.resolution = 1, s.channels = 3;
  return s;
}

// Center-tap identity convs with zero bias reduce the encoder to the per-cell
// max of relu(point mlp).
PillarEncoderParams IdentityConvEncoder(Rng& rng) {
  PillarEncoderParams p = MakePillarEncoder(3, rng);
  for (Tensor* w : {&p.conv1_weight, &p.conv2_weight}) {
    std::fill(w->mutable_data().begin(), w->mutable_data().end(), 0.0);
    for (int c = 0; c < 3; ++c) (*w)[((1 * 3 + 1) * 3 + c) * 3 + c] = 1.0;
  }
  return p;
}

TEST(Pillarize, EmptyInputGivesZeroGrid) {
  Rng rng(1);
  const auto params = MakePillarEncoder(3, rng);
  const Tensor f = Pillarize(std::vector<RadarPoint>{}, SmallGrid(), params);
  EXPECT_EQ(f.shape(), (Shape{8, 8, 3}));
  for (double x : f.data()) EXPECT_EQ(x, 0.0);
}

TEST(Pillarize, SinglePointOnlyAffectsNeighborhood) {
  Rng rng(2);
  auto params = MakePillarEncoder(3, rng);
  params.conv1_bias = Tensor::Full({3}, 0.0);
  params.conv2_bias = Tensor::Full({3}, 0.0);
  const Tensor f = Pillarize(std::vector<RadarPoint>{Point(-3.5, -3.5)}, SmallGrid(), params);
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) {
      if (r <= 2 && c <= 2) continue;
      for (int k = 0; k < 3; ++k) EXPECT_EQ(f.at(r, c, k), 0.0) << r << "," << c;
    }
  }
}

TEST(Pillarize, MaxPoolsWithinCell) {
  Rng rng(3);
  const auto params = IdentityConvEncoder(rng);
  const BevGridSpec spec = SmallGrid();
  const std::vector<RadarPoint> pts = {Point(0.2, 0.3, 1), Point(0.7, 0.6, 9, Vec2(3, -1)),
                                       Point(2.5, -1.5, 4)};
  const Tensor f = Pillarize(pts, spec, params);
  testing::Row expect(3, 0.0);
  for (int i = 0; i < 2; ++i) {
    const auto row = testing::RefMlp(params.point_mlp, PointFeatures(pts[i], spec, {4, 4}));
    for (int k = 0; k < 3; ++k) expect[k] = std::max(expect[k], std::max(row[k], 0.0));
  }
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(f.at(4, 4, k), expect[k], 1e-12);
  const auto lone = testing::RefMlp(params.point_mlp, PointFeatures(pts[2], spec, {6, 2}));
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(f.at(6, 2, k), std::max(lone[k], 0.0), 1e-12);
}

TEST(Pillarize, OrderInvariant) {
  Rng rng(4);
  const auto params = MakePillarEncoder(3, rng);
  std::vector<RadarPoint> pts;
  for (int i = 0; i < 40; ++i) pts.push_back(Point(rng.Uniform(-4, 4), rng.Uniform(-4, 4), rng.Uniform(-5, 20)));
  const Tensor a = Pillarize(pts, SmallGrid(), params);
  std::reverse(pts.begin(), pts.end());
  const Tensor b = Pillarize(pts, SmallGrid(), params);
  EXPECT_EQ(a.values(), b.values());
}

TEST(Pillarize, PointsOutsideGridIgnored) {
  Rng rng(5);
  const auto params = MakePillarEncoder(3, rng);
  const Tensor a = Pillarize(std::vector<RadarPoint>{Point(1, 1)}, SmallGrid(), params);
  const Tensor b = Pillarize(std::vector<RadarPoint>{Point(1, 1), Point(9, 9)}, SmallGrid(), params);
  EXPECT_EQ(a.values(), b.values());
}

}  // namespace
}  // namespace radcam
