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
#include <cmath>
#include <numeric>

#include "criteria.h"
#include "gradcheck.h"
#include "radcam/refinement.h"
#include "reference.h"

namespace radcam {
namespace {

RadarPoint At(double x, double y, double z = 0.5) {
  RadarPoint p;
  p.position = Vec3(x, y, z);
  p.rcs = 8;
  return p;
}

TEST(Associate, WindowEdgesAreClosed) {
  AssociationConfig cfg;
  const double az = cfg.azimuth_window;
  const std::vector<RadarPoint> pts = {
      At(20, 0),                                            // same ray
      At(22.99 * std::cos(az * 0.999), 22.99 * std::sin(az * 0.999)),  // near both edges
      At(20 * std::cos(az * 1.01), 20 * std::sin(az * 1.01)),    // outside azimuth
      At(23.5, 0),                                          // outside range
      At(-20, 0)};                                          // opposite side
  EXPECT_EQ(SoftPolarAssociate(Vec2(20, 0), pts, cfg), (std::vector<int>{0, 1}));
}

TEST(Associate, WrapsAcrossPi) {
  AssociationConfig cfg;
  const std::vector<RadarPoint> pts = {At(-10, 0.1), At(-10, -0.1)};
  EXPECT_EQ(SoftPolarAssociate(Vec2(-10, 0.0), pts, cfg).size(), 2u);
}

TEST(Associate, MatchesPredicateOracle) {
  Rng rng(1);
  AssociationConfig cfg;
  for (int trial = 0; trial < 100; ++trial) {
    const Vec2 c(rng.Uniform(-30, 30), rng.Uniform(-30, 30));
    std::vector<RadarPoint> pts;
    for (int i = 0; i < 60; ++i) pts.push_back(At(c.x() + rng.Uniform(-5, 5), c.y() + rng.Uniform(-5, 5)));
    std::vector<int> expect;
    for (int i = 0; i < 60; ++i) {
      const Vec2 p = pts[i].position.head<2>();
      double dphi = std::atan2(p.y(), p.x()) - std::atan2(c.y(), c.x());
      dphi = std::abs(std::remainder(dphi, 2 * kPi));
      if (dphi <= cfg.azimuth_window && std::abs(p.norm() - c.norm()) <= cfg.radial_window) expect.push_back(i);
    }
    EXPECT_EQ(SoftPolarAssociate(c, pts, cfg), expect);
  }
}

TEST(SightFrame, AlignsWithRay) {
  const SightFrame f = SightFrame::At(Vec2(0, 5));
  EXPECT_LT((f.radial - Vec2(0, 1)).norm(), 1e-15);
  EXPECT_LT((f.tangential - Vec2(-1, 0)).norm(), 1e-15);
  const SightFrame o = SightFrame::At(Vec2(0, 0));
  EXPECT_EQ(o.radial, Vec2(1, 0));
  const Vec2 v(0.3, -2);
  EXPECT_LT((f.ToEgo(f.ToLocal(v)) - v).norm(), 1e-15);
}

TEST(Encoding, WidthAndZeroOffset) {
  const auto e = PositionalEncoding(Vec3::Zero(), 4);
  ASSERT_EQ(e.size(), 24u);
  int ones = 0;
  for (double x : e) {
    EXPECT_TRUE(x == 0.0 || x == 1.0);
    ones += x == 1.0;
  }
  EXPECT_EQ(ones, 12);
}

RefinementParams RandomRefinement(Rng& rng) {
  RefinementParams p = MakeRefinement(4, 6, 5, rng, 3);
  testing::Randomize(p.point_mlp, rng);
  testing::Randomize(p.score_mlp, rng);
  testing::Randomize(p.value_mlp, rng);
  return p;
}

TEST(Attention, SinglePointHasWeightOne) {
  Rng rng(2);
  const RefinementParams p = RandomRefinement(rng);
  Tape tape;
  ParamBinder bind(tape);
  const std::vector<RadarPoint> pts = {At(10, 1)};
  const AttentionOutput out = ProposalRadarAttention(bind, Vec3(10, 0, 0.5), pts, p);
  EXPECT_EQ(out.weights.value()[0], 1.0);
  const auto value = testing::RefMlp(p.value_mlp, RadarPointFeature(pts[0], Vec3(10, 0, 0.5)));
  for (int a = 0; a < 5; ++a) EXPECT_NEAR(out.attended.value()[a], value[a], 1e-12);
}

TEST(Attention, IdenticalPointsShareWeight) {
  Rng rng(3);
  const RefinementParams p = RandomRefinement(rng);
  Tape tape;
  ParamBinder bind(tape);
  const std::vector<RadarPoint> pts(5, At(7, -3));
  const AttentionOutput out = ProposalRadarAttention(bind, Vec3(8, -3, 0), pts, p);
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(out.weights.value()[k], 0.2, 1e-15);
}

TEST(Attention, UniformWhenDisabled) {
  Rng rng(4);
  const RefinementParams p = RandomRefinement(rng);
  Tape tape;
  ParamBinder bind(tape);
  const std::vector<RadarPoint> pts = {At(10, 1), At(11, 0), At(9, -1), At(10, 0)};
  const AttentionOutput out = ProposalRadarAttention(bind, Vec3(10, 0, 0.5), pts, p, false);
  for (int k = 0; k < 4; ++k) EXPECT_EQ(out.weights.value()[k], 0.25);
}

TEST(Attention, MatchesDirectOracle) {
  const testing::Verdict v = testing::CheckAttentionFormula(200, 5);
  EXPECT_TRUE(v.pass) << v.detail;
}

TEST(Grid, SpacingClampAndCenter) {
  const auto g = GenerateGridPoints(Vec2(1, 2), Vec2(0, 10), 5, 0.5, 3.0, 0.0);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_LT((g[2] - Vec2(1, 2)).norm(), 1e-15);
  for (int i = 1; i < 5; ++i) {
    EXPECT_NEAR((g[i] - g[i - 1]).norm(), 0.75, 1e-12);
    EXPECT_NEAR(g[i].x(), 1.0, 1e-15);
  }
  const auto slow = GenerateGridPoints(Vec2(0, 0), Vec2(0.1, 0), 3, 0.5, 3.0, 0.0);
  EXPECT_NEAR((slow[2] - slow[0]).norm(), 0.5, 1e-15);
}

TEST(Grid, StationaryFallsBackToYawNormal) {
  const auto g = GenerateGridPoints(Vec2(0, 0), Vec2::Zero(), 3, 0.5, 3.0, 0.0);
  EXPECT_LT((g[0] - Vec2(0, -0.25)).norm(), 1e-15);
  EXPECT_LT((g[2] - Vec2(0, 0.25)).norm(), 1e-15);
  EXPECT_THROW(GenerateGridPoints(Vec2(0, 0), Vec2::Zero(), 1, 0.5, 3.0, 0.0), ConfigError);
}

TEST(Grid, FormulaOracle) {
  const testing::Verdict v = testing::CheckGridFormula(1000, 6);
  EXPECT_TRUE(v.pass) << v.detail;
}

TEST(Fps, LineExample) {
  const std::vector<Vec3> pts = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(3, 0, 0), Vec3(10, 0, 0)};
  EXPECT_EQ(FarthestPointSampleFrom(pts, 3, 0), (std::vector<int>{0, 4, 3}));
  EXPECT_EQ(FarthestPointSample(pts, 2, Vec3(2.9, 0, 0)), (std::vector<int>{3, 4}));
}

TEST(Fps, FewerCandidatesReturnsAll) {
  const std::vector<Vec3> pts = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
  auto idx = FarthestPointSampleFrom(pts, 5, 1);
  std::sort(idx.begin(), idx.end());
  EXPECT_EQ(idx, (std::vector<int>{0, 1}));
}

TEST(Fps, MatchesBruteForce) {
  const testing::Verdict v = testing::CheckFarthestPoints(500, 7);
  EXPECT_TRUE(v.pass) << v.detail;
}

Var RunSetAbstraction(Tape& tape, const RefinementParams& p, const Tensor& attended,
                      const std::vector<Vec3>& pts, const std::vector<Vec3>& grid) {
  ParamBinder bind(tape);
  const auto pairs = BallQuery(pts, grid, p.radii);
  return SetAbstraction(bind, tape.Constant(attended), pairs, static_cast<int>(grid.size()), p);
}

TEST(SetAbstraction, EmptyBallsAreZero) {
  Rng rng(8);
  const RefinementParams p = RandomRefinement(rng);
  Tensor a({1, 5});
  testing::Randomize(a, rng);
  Tape tape;
  const Tensor f = RunSetAbstraction(tape, p, a, {Vec3(0, 0, 0)}, {Vec3(50, 0, 0), Vec3(0, 0, 0)}).value();
  EXPECT_EQ(f.dim(0), 2);
  EXPECT_EQ(f.dim(1), 4);
  for (int c = 0; c < 4; ++c) EXPECT_EQ(f.at(0, c), 0.0);
}

TEST(SetAbstraction, DistanceIsPlanar) {
  const std::vector<Vec3> pts = {Vec3(0, 0, 0)};
  const std::vector<Vec3> grid = {Vec3(0.5, 0, 10)};
  const std::vector<double> radii = {0.8};
  const auto pairs = BallQuery(pts, grid, radii);
  EXPECT_EQ(pairs[0].point.size(), 1u);
  EXPECT_EQ(pairs[0].offset[2], -10.0);
}

TEST(SetAbstraction, PointOrderDoesNotMatter) {
  Rng rng(9);
  const RefinementParams p = RandomRefinement(rng);
  std::vector<Vec3> pts;
  for (int i = 0; i < 8; ++i) pts.emplace_back(rng.Uniform(-1, 1), rng.Uniform(-1, 1), 0);
  const std::vector<Vec3> grid = {Vec3(0, 0, 0), Vec3(0.5, 0.5, 0), Vec3(-1, 0.2, 0)};
  Tensor a({8, 5});
  testing::Randomize(a, rng);
  Tape t1, t2;
  const Tensor f1 = RunSetAbstraction(t1, p, a, pts, grid).value();
  std::vector<int> perm(8);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::vector<Vec3> pts2;
  Tensor a2({8, 5});
  for (int i = 0; i < 8; ++i) {
    pts2.push_back(pts[perm[i]]);
    for (int j = 0; j < 5; ++j) a2.at(i, j) = a.at(perm[i], j);
  }
  const Tensor f2 = RunSetAbstraction(t2, p, a2, pts2, grid).value();
  for (std::size_t i = 0; i < f1.size(); ++i) EXPECT_NEAR(f1[i], f2[i], 1e-15);
}

TEST(SetAbstraction, CoincidentPointsEqualOne) {
  Rng rng(10);
  const RefinementParams p = RandomRefinement(rng);
  Tensor a1({1, 5});
  testing::Randomize(a1, rng);
  Tensor a3({3, 5});
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 5; ++j) a3.at(i, j) = a1.at(0, j);
  }
  const std::vector<Vec3> grid = {Vec3(0.2, 0, 0)};
  Tape t1, t2;
  const Tensor f1 = RunSetAbstraction(t1, p, a1, {Vec3(0, 0, 0)}, grid).value();
  const Tensor f3 = RunSetAbstraction(t2, p, a3, std::vector<Vec3>(3, Vec3(0, 0, 0)), grid).value();
  EXPECT_EQ(f1.values(), f3.values());
}

TEST(ImagePool, BehindCameraIsZeroAndConstantMapIsConstant) {
  testing::TinyScene scene = testing::MakeTinyScene(4, 11);
  for (double& x : scene.cameras[0].levels[0].mutable_data()) x = 2.5;
  const std::vector<Vec3> grid = {Vec3(-20, 0, 1), Vec3(0, 0, 1)};
  const Tensor f = PoolImageFeatures(grid, scene.cameras);
  for (int c = 0; c < 4; ++c) {
    EXPECT_EQ(f.at(0, c), 0.0);
    EXPECT_NEAR(f.at(1, c), 2.5, 1e-12);
  }
}

TEST(ImagePool, AveragesViews) {
  testing::TinyScene scene = testing::MakeTinyScene(4, 12);
  CameraFeatures second = scene.cameras[0];
  for (double& x : scene.cameras[0].levels[0].mutable_data()) x = 1.0;
  for (double& x : second.levels[0].mutable_data()) x = 3.0;
  scene.cameras.push_back(second);
  const Tensor f = PoolImageFeatures(std::vector<Vec3>{Vec3(0, 0, 1)}, scene.cameras);
  for (int c = 0; c < 4; ++c) EXPECT_NEAR(f.at(0, c), 2.0, 1e-12);
}

Proposal MovingCar() {
  Proposal p;
  p.center = Vec3(12, 3, 0.8);
  p.size = Vec3(1.8, 4.4, 1.6);
  p.yaw = 0.3;
  p.velocity = Vec2(2, 5);
  p.score = 0.6;
  p.latent = Tensor::Full({4}, 0.1);
  return p;
}

std::vector<RadarPoint> PointsAround(const Vec3& c, int n, Rng& rng) {
  std::vector<RadarPoint> out;
  for (int i = 0; i < n; ++i) out.push_back(At(c.x() + rng.Uniform(-1, 1), c.y() + rng.Uniform(-1, 1)));
  return out;
}

TEST(Refine, ZeroHeadIsIdentity) {
  Rng rng(13);
  const RefinementParams p = MakeRefinement(4, 6, 5, rng, 3);
  const testing::TinyScene scene = testing::MakeTinyScene(4, 13);
  const Proposal in = MovingCar();
  const Proposal out = RefineProposal(in, PointsAround(in.center, 10, rng), scene.cameras, {}, p);
  EXPECT_EQ(out.center, in.center);
  EXPECT_EQ(out.size, in.size);
  EXPECT_EQ(out.yaw, in.yaw);
  EXPECT_EQ(out.velocity, in.velocity);
  EXPECT_EQ(out.score, in.score);
}

TEST(Refine, NoAssociatedPointsBypasses) {
  Rng rng(14);
  RefinementParams p = MakeRefinement(4, 6, 5, rng, 3);
  testing::Randomize(p.refine_head, rng);
  const testing::TinyScene scene = testing::MakeTinyScene(4, 14);
  const Proposal in = MovingCar();
  RefinementInputs inputs;
  const std::vector<RadarPoint> far = {At(-30, -30)};
  EXPECT_FALSE(PrepareRefinement(in, far, scene.cameras, {}, p, &inputs));
  EXPECT_EQ(RefineProposal(in, far, scene.cameras, {}, p).center, in.center);
}

TEST(Refine, SinglePointSingleGrid) {
  Rng rng(15);
  RefinementParams p = MakeRefinement(4, 6, 5, rng, 3);
  p.num_grid_points = 1;
  testing::Randomize(p.refine_head, rng);
  const testing::TinyScene scene = testing::MakeTinyScene(4, 15);
  const Proposal in = MovingCar();
  RefinementInputs inputs;
  ASSERT_TRUE(PrepareRefinement(in, std::vector<RadarPoint>{At(12.2, 3.1)}, scene.cameras, {}, p, &inputs));
  EXPECT_EQ(inputs.grid.size(), 1u);
  Tape tape;
  ParamBinder bind(tape);
  const Tensor r = RefinementForward(bind, inputs, p, true).value();
  EXPECT_EQ(r.size(), static_cast<std::size_t>(kResidualWidth));
  for (double x : r.data()) EXPECT_TRUE(std::isfinite(x));
}

TEST(Refine, GridSizeAndInvariants) {
  Rng rng(16);
  const RefinementParams p = MakeRefinement(4, 6, 5, rng, 3);
  const testing::TinyScene scene = testing::MakeTinyScene(4, 16);
  const Proposal in = MovingCar();
  RefinementInputs inputs;
  ASSERT_TRUE(PrepareRefinement(in, PointsAround(in.center, 20, rng), scene.cameras, {}, p, &inputs));
  EXPECT_EQ(static_cast<int>(inputs.grid.size()), p.num_grid_points);
  for (const Vec3& g : inputs.grid) EXPECT_EQ(g.z(), in.center.z());
  EXPECT_EQ(inputs.image_features.dim(0), p.num_grid_points);
  EXPECT_EQ(inputs.pairs.size(), p.radii.size());
}

TEST(Residuals, SightFrameAndClamp) {
  Proposal in = MovingCar();
  in.center = Vec3(0, 10, 0);
  std::vector<double> r(kResidualWidth, 0.0);
  r[0] = 1.0;   // radial, +y here
  r[1] = 2.0;   // tangential, -x here
  r[3] = 100;   // clamped
  r[6] = kPi;
  const Proposal out = ApplyResiduals(in, r);
  EXPECT_LT((out.center - Vec3(-2, 11, 0)).norm(), 1e-12);
  EXPECT_NEAR(out.size.x(), in.size.x() * std::exp(5.0), 1e-9);
  EXPECT_GT(out.yaw, -kPi);
  EXPECT_LE(out.yaw, kPi);
  EXPECT_EQ(out.score, in.score);
  r.assign(kResidualWidth, 0.0);
  r[9] = 1.0;
  EXPECT_GT(ApplyResiduals(in, r).score, in.score);
  EXPECT_THROW(ApplyResiduals(in, std::vector<double>(3, 0.0)), ShapeError);
}

}  // namespace
}  // namespace radcam
