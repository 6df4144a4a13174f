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

#include "radcam/scene_sim.h"
#include "radcam/train.h"

namespace radcam {
namespace {

RunConfig TinyConfig() {
  return ParseConfig(
      "grid.x_min = -8\ngrid.x_max = 8\ngrid.y_min = -8\ngrid.y_max = 8\n"
      "grid.resolution = 1\ngrid.channels = 4\n"
      "sim.max_objects = 5\nsim.num_sweeps = 2\nsim.num_cameras = 2\n"
      "sim.image_width = 64\nsim.image_height = 32\n"
      "encoder.layers = 1\nencoder.sampling_points = 2\n"
      "refine.hidden = 4\nrefine.attended_width = 4\nrefine.num_grid_points = 8\n"
      "refine.encoding_frequencies = 2\n"
      "train.refine_proposals = 4\nhead.max_proposals = 10\nrun.seed = 5\n");
}

std::vector<std::unique_ptr<PreparedScene>> Scenes(const RunConfig& c, int n) {
  std::vector<SceneRecord> records;
  for (int i = 0; i < n; ++i) records.push_back(GenerateScene(c.sim, DeriveSeed(c.seed, i)));
  return PrepareScenes(records, c);
}

std::vector<double> Flatten(ModelParams& p) {
  std::vector<double> out;
  for (const auto& [name, t] : p.All()) out.insert(out.end(), t->data().begin(), t->data().end());
  return out;
}

TEST(Train, FirstStageLossDecreasesOnOneScene) {
  RunConfig c = TinyConfig();
  c.train_steps = 200;
  const auto scenes = Scenes(c, 1);
  ModelParams p = InitModel(c, c.seed);
  std::vector<LossRecord> log;
  TrainFirstStage(p, scenes, c, &log);
  ASSERT_EQ(log.size(), 200u);
  EXPECT_LT(log.back().total, 0.5 * log.front().total);
  for (const LossRecord& r : log) EXPECT_EQ(r.phase, "first");
}

TEST(Train, ZeroStepsKeepsInitialWeights) {
  RunConfig c = TinyConfig();
  c.train_steps = 0;
  c.refine_steps = 0;
  const auto scenes = Scenes(c, 2);
  ModelParams init = InitModel(c, c.seed);
  std::vector<LossRecord> log;
  ModelParams trained = Train(c, scenes, &log);
  EXPECT_TRUE(log.empty());
  EXPECT_EQ(Flatten(trained), Flatten(init));
}

TEST(Train, RepeatRunsGiveSameTraceAndWeights) {
  RunConfig c = TinyConfig();
  c.train_steps = 10;
  c.refine_steps = 10;
  const auto scenes = Scenes(c, 3);
  std::vector<LossRecord> a, b;
  ModelParams pa = Train(c, scenes, &a);
  ModelParams pb = Train(c, scenes, &b);
  EXPECT_EQ(LossLogCsv(a), LossLogCsv(b));
  EXPECT_EQ(Flatten(pa), Flatten(pb));
}

TEST(Train, ThreadCountDoesNotChangeResult) {
  RunConfig c = TinyConfig();
  c.train_steps = 10;
  c.refine_steps = 10;
  c.batch_size = 2;
  const auto scenes = Scenes(c, 4);
  std::vector<LossRecord> a, b;
  ModelParams pa = Train(c, scenes, &a);
  c.threads = 4;
  ModelParams pb = Train(c, scenes, &b);
  EXPECT_EQ(LossLogCsv(a), LossLogCsv(b));
  EXPECT_EQ(Flatten(pa), Flatten(pb));
}

TEST(Train, RefinementPhaseOnlyWithRgpp) {
  RunConfig c = TinyConfig();
  c.train_steps = 3;
  c.refine_steps = 3;
  const auto scenes = Scenes(c, 2);
  std::vector<LossRecord> with, without;
  Train(c, scenes, &with);
  c.ablation = AblationFlags::Parse("rgbq,rcg");
  Train(c, scenes, &without);
  EXPECT_EQ(with.size(), 6u);
  EXPECT_EQ(with.back().phase, "refine");
  EXPECT_EQ(without.size(), 3u);
}

TEST(Optimizer, SgdStepIsPlainDescent) {
  Tensor w = Tensor::Vector({1.0, -2.0});
  Optimizer opt({{"w", &w}}, false);
  opt.Step({Tensor::Vector({0.5, 0.25})}, 0.1);
  EXPECT_DOUBLE_EQ(w[0], 0.95);
  EXPECT_DOUBLE_EQ(w[1], -2.025);
}

TEST(Optimizer, AdamFirstStepMovesByLearningRate) {
  Tensor w = Tensor::Vector({1.0, -2.0});
  Optimizer opt({{"w", &w}}, true);
  opt.Step({Tensor::Vector({0.5, -3.0})}, 0.01);
  EXPECT_NEAR(w[0], 0.99, 1e-7);
  EXPECT_NEAR(w[1], -1.99, 1e-7);
}

}  // namespace
}  // namespace radcam
