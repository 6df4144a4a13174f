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

#include <cmath>

#include "gradcheck.h"
#include "radcam/detection_head.h"

namespace radcam {
namespace {

BevGridSpec Grid() {
  BevGridSpec s;
  s.x_min = -8, s.x_max = 8, s.y_min = -8, s.y_max = 8, s.resolution = 1, s.channels = 4;
  return s;
}

TEST(Decode, FlatHeatmapGivesOnePeakPerClass) {
  const BevGridSpec spec = Grid();
  const Tensor logits({16, 16, kNumClasses}), reg({16, 16, kRegressionWidth}), bev({16, 16, 4});
  const auto props = DecodeProposals(logits, reg, bev, spec, 100);
  ASSERT_EQ(props.size(), 3u);
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(static_cast<int>(props[k].label), k);
    EXPECT_EQ(props[k].cell, (BevCell{0, 0}));
    EXPECT_DOUBLE_EQ(props[k].score, 0.5);
  }
}

TEST(Decode, ZeroBudgetIsEmpty) {
  const Tensor logits({16, 16, kNumClasses}), reg({16, 16, kRegressionWidth}), bev({16, 16, 4});
  EXPECT_TRUE(DecodeProposals(logits, reg, bev, Grid(), 0).empty());
}

TEST(Decode, PeaksStrongestFirstWithLatent) {
  const BevGridSpec spec = Grid();
  Tensor logits = Tensor::Full({16, 16, kNumClasses}, -5.0);
  logits.at(3, 4, 0) = 2.0;
  logits.at(10, 12, 1) = 3.0;
  logits.at(10, 13, 1) = 1.0;  // neighbor of a stronger cell
  Tensor reg({16, 16, kRegressionWidth}), bev({16, 16, 4});
  for (int k = 0; k < 4; ++k) bev.at(10, 12, k) = k + 0.5;
  const auto props = DecodeProposals(logits, reg, bev, spec, 2);
  ASSERT_EQ(props.size(), 2u);
  EXPECT_EQ(props[0].cell, (BevCell{10, 12}));
  EXPECT_EQ(props[0].label, ObjectClass::kPedestrian);
  EXPECT_NEAR(props[0].score, 1 / (1 + std::exp(-3.0)), 1e-15);
  EXPECT_EQ(props[0].latent.values(), (std::vector<double>{0.5, 1.5, 2.5, 3.5}));
  EXPECT_EQ(props[1].cell, (BevCell{3, 4}));
}

TEST(BoxCoding, RoundTrip) {
  const BevGridSpec spec = Grid();
  Rng rng(1);
  for (int i = 0; i < 300; ++i) {
    Box3d b;
    b.center = Vec3(rng.Uniform(-8, 8), rng.Uniform(-8, 8), rng.Uniform(-1, 2));
    b.size = Vec3(rng.Uniform(0.3, 3), rng.Uniform(0.3, 6), rng.Uniform(0.5, 3));
    b.yaw = rng.Uniform(-kPi, kPi);
    b.velocity = Vec2(rng.Uniform(-10, 10), rng.Uniform(-10, 10));
    b.label = static_cast<ObjectClass>(i % 3);
    const BevCell cell = *BevCellOf(b.center.head<2>(), spec);
    const auto reg = EncodeBox(b, spec, cell);
    ASSERT_EQ(reg.size(), static_cast<std::size_t>(kRegressionWidth));
    const Box3d d = DecodeBox(reg, spec, cell, b.label);
    EXPECT_LT((d.center - b.center).norm(), 1e-9);
    EXPECT_LT((d.size - b.size).norm(), 1e-9);
    EXPECT_NEAR(std::remainder(d.yaw - b.yaw, 2 * kPi), 0.0, 1e-9);
    EXPECT_LT((d.velocity - b.velocity).norm(), 1e-9);
    EXPECT_EQ(d.label, b.label);
  }
}

TEST(Targets, PeakAtCenterAndMaskOnlyThere) {
  const BevGridSpec spec = Grid();
  Box3d car;
  car.center = Vec3(2.5, -3.5, 0.8);
  car.size = Vec3(1.8, 4.5, 1.6);
  Box3d far = car;
  far.center = Vec3(20, 0, 0);
  const std::vector<Box3d> gt = {car, far};
  const HeadTargets t = EncodeTargets(gt, spec);
  EXPECT_EQ(t.num_objects, 1);
  EXPECT_EQ(t.skipped, 1);
  const BevCell cell = *BevCellOf(car.center.head<2>(), spec);
  EXPECT_EQ(t.heatmap.at(cell.row, cell.col, 0), 1.0);
  double mask_sum = 0;
  for (double m : t.mask.data()) mask_sum += m;
  EXPECT_EQ(mask_sum, kRegressionWidth);
  for (int r = 0; r < 16; ++r) {
    for (int c = 0; c < 16; ++c) {
      EXPECT_LE(t.heatmap.at(r, c, 0), 1.0);
      EXPECT_EQ(t.heatmap.at(r, c, 1), 0.0);
      if (r != cell.row || c != cell.col) EXPECT_LT(t.heatmap.at(r, c, 0), 1.0);
    }
  }
  const auto reg = EncodeBox(car, spec, cell);
  for (int j = 0; j < kRegressionWidth; ++j) EXPECT_EQ(t.regression.at(cell.row, cell.col, j), reg[j]);
}

TEST(Head, ForwardShapesAndDecodeOfTargets) {
  const BevGridSpec spec = Grid();
  Rng rng(2);
  const HeadParams params = MakeHead(4, rng);
  Tensor bev({16, 16, 4});
  testing::Randomize(bev, rng);
  Tape tape;
  ParamBinder bind(tape);
  const HeadOutput out = HeadForward(bind, tape.Constant(bev), params);
  EXPECT_EQ(out.heatmap_logits.shape(), (Shape{16, 16, kNumClasses}));
  EXPECT_EQ(out.regression.shape(), (Shape{16, 16, kRegressionWidth}));
  const auto props = Propose(BevFeatureMap{bev, spec}, params, 5);
  EXPECT_LE(props.size(), 5u);
  for (std::size_t i = 1; i < props.size(); ++i) EXPECT_GE(props[i - 1].score, props[i].score);
}

TEST(Head, LossIsZeroFreeOnlyAtTargets) {
  const BevGridSpec spec = Grid();
  Rng rng(3);
  const HeadParams params = MakeHead(4, rng);
  Tensor bev({16, 16, 4});
  testing::Randomize(bev, rng);
  Box3d b;
  b.center = Vec3(0.5, 0.5, 0.5);
  const std::vector<Box3d> gt = {b};
  const HeadTargets t = EncodeTargets(gt, spec);
  Tape tape;
  ParamBinder bind(tape);
  const HeadLossTerms loss = HeadLoss(HeadForward(bind, tape.Constant(bev), params), t);
  EXPECT_GT(loss.heatmap, 0.0);
  EXPECT_GE(loss.regression, 0.0);
  EXPECT_TRUE(std::isfinite(loss.total.value()[0]));
}

TEST(Proposal, ValidateRejectsBadFields) {
  Proposal p;
  EXPECT_NO_THROW(p.Validate());
  p.score = 1.5;
  EXPECT_THROW(p.Validate(), ContractError);
  p.score = 0.5;
  p.size = Vec3(1, 0, 1);
  EXPECT_THROW(p.Validate(), ContractError);
}

}  // namespace
}  // namespace radcam
