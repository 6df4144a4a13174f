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

#include <filesystem>

#include "radcam/commands.h"
#include "radcam/io.h"

namespace radcam {
namespace {

namespace fs = std::filesystem;

fs::path TempDir(const std::string& name) {
  const fs::path dir = fs::path(::testing::TempDir()) / ("radcam_cmd_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunConfig TinyConfig() {
  return ParseConfig(
      "grid.x_min = -8\ngrid.x_max = 8\ngrid.y_min = -8\ngrid.y_max = 8\n"
      "grid.resolution = 1\ngrid.channels = 4\n"
      "sim.max_objects = 5\nsim.num_sweeps = 2\nsim.num_cameras = 2\n"
      "sim.image_width = 64\nsim.image_height = 32\n"
      "encoder.layers = 1\nencoder.sampling_points = 2\n"
      "refine.hidden = 4\nrefine.attended_width = 4\nrefine.num_grid_points = 8\n"
      "refine.encoding_frequencies = 2\n"
      "train.steps = 3\ntrain.refine_steps = 3\ntrain.refine_proposals = 4\n"
      "head.max_proposals = 10\nrun.seed = 3\n");
}

TEST(Gen, WritesScenesAndManifest) {
  const fs::path dir = TempDir("gen");
  CmdGen(TinyConfig(), 10, dir);
  EXPECT_EQ(ListSceneFiles(dir).size(), 10u);
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
  EXPECT_EQ(ReadScene(dir / "scene-00003.json").scene_id, "scene-00003");
}

TEST(Gen, HashDependsOnlyOnSeedAndConfig) {
  RunConfig c = TinyConfig();
  const fs::path a_dir = TempDir("hash_a"), b_dir = TempDir("hash_b");
  const std::string a = CmdGen(c, 4, a_dir);
  c.threads = 3;
  EXPECT_EQ(CmdGen(c, 4, b_dir), a);
  EXPECT_EQ(ReadFile(b_dir / "scene-00002.json"), ReadFile(a_dir / "scene-00002.json"));
  EXPECT_EQ(ReadFile(b_dir / "manifest.json"), ReadFile(a_dir / "manifest.json"));
  c.seed = 4;
  EXPECT_NE(CmdGen(c, 4, TempDir("hash_d")), a);
}

TEST(Gen, ZeroScenesWritesOnlyManifest) {
  const fs::path dir = TempDir("zero");
  CmdGen(TinyConfig(), 0, dir);
  EXPECT_TRUE(ListSceneFiles(dir).empty());
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
}

class Pipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = new fs::path(TempDir("pipeline"));
    CmdGen(TinyConfig(), 6, *root_ / "scenes");
    CmdTrain(TinyConfig(), *root_ / "scenes", *root_ / "model.ckpt", *root_ / "train");
  }
  static void TearDownTestSuite() { delete root_; }
  static fs::path* root_;
};
fs::path* Pipeline::root_ = nullptr;

TEST_F(Pipeline, TrainWritesArtifacts) {
  for (const char* f : {"loss.csv", "loss.svg", "config.txt"}) {
    EXPECT_TRUE(fs::exists(*root_ / "train" / f)) << f;
  }
  EXPECT_TRUE(fs::exists(*root_ / "model.ckpt.bin"));
}

TEST_F(Pipeline, InferIsDeterministicAcrossThreads) {
  RunConfig c = TinyConfig();
  CmdInfer(c, *root_ / "model.ckpt", *root_ / "scenes", *root_ / "infer1");
  c.threads = 3;
  CmdInfer(c, *root_ / "model.ckpt", *root_ / "scenes", *root_ / "infer3");
  EXPECT_EQ(ReadFile(*root_ / "infer1" / "detections.json"),
            ReadFile(*root_ / "infer3" / "detections.json"));
  EXPECT_EQ(DetectionsFromJson(ReadFile(*root_ / "infer1" / "detections.json")).size(), 6u);
}

TEST_F(Pipeline, EvalOfGroundTruthIsPerfect) {
  std::vector<SceneDetections> dets;
  bool seen[kNumClasses] = {};
  for (const SceneRecord& s : ReadScenes(*root_ / "scenes", 1)) {
    SceneDetections d{s.scene_id, {}};
    for (const Box3d& b : s.gt) {
      d.detections.push_back(Detection{b, 1.0});
      seen[static_cast<int>(b.label)] = true;
    }
    dets.push_back(d);
  }
  ASSERT_TRUE(seen[0] && seen[1] && seen[2]);
  const fs::path file = *root_ / "gt_dets" / "detections.json";
  fs::create_directories(file.parent_path());
  WriteFile(file, DetectionsToJson(dets));
  const std::string report = CmdEval(std::vector<fs::path>{file}, *root_ / "scenes", *root_ / "eval_gt", 1);
  EXPECT_NE(report.find("mAP 1.0000  NDS 1.0000"), std::string::npos) << report;
  for (const char* f : {"metrics.json", "report.txt", "pr_car.svg", "bev_scatter.svg"}) {
    EXPECT_TRUE(fs::exists(*root_ / "eval_gt" / f)) << f;
  }
}

TEST_F(Pipeline, EvalOfEmptyDetectionsIsZero) {
  std::vector<SceneDetections> dets;
  for (const SceneRecord& s : ReadScenes(*root_ / "scenes", 1)) dets.push_back({s.scene_id, {}});
  const fs::path file = *root_ / "empty.json";
  WriteFile(file, DetectionsToJson(dets));
  const std::string report = CmdEval(std::vector<fs::path>{file}, *root_ / "scenes", *root_ / "eval_empty", 1);
  EXPECT_NE(report.find("mAP 0.0000"), std::string::npos) << report;
}

TEST_F(Pipeline, EvalRejectsUnknownScene) {
  const fs::path file = *root_ / "bad.json";
  WriteFile(file, DetectionsToJson(std::vector<SceneDetections>{{"nope", {}}}));
  EXPECT_THROW(CmdEval(std::vector<fs::path>{file}, *root_ / "scenes", *root_ / "eval_bad", 1), DataError);
}

TEST_F(Pipeline, CheckpointFromOtherGridIsRejected) {
  RunConfig c = TinyConfig();
  c.sim.grid.channels = 6;
  EXPECT_THROW(CmdInfer(c, *root_ / "model.ckpt", *root_ / "scenes", *root_ / "infer_bad"), ConfigError);
}

TEST(Table, RowsWithDeltas) {
  TableRow a, b;
  a.label = "base";
  a.metrics.map = 0.25;
  a.metrics.nds = 0.30;
  b.label = "full";
  b.flags = AblationFlags();
  b.has_flags = true;
  b.metrics.map = 0.35;
  b.metrics.nds = 0.32;
  const std::string t = ComparisonTable(std::vector<TableRow>{a, b});
  EXPECT_NE(t.find("base"), std::string::npos);
  EXPECT_NE(t.find("+10.00"), std::string::npos);
  EXPECT_NE(t.find("+2.00"), std::string::npos);
  EXPECT_NE(t.find("  ? "), std::string::npos);
}

}  // namespace
}  // namespace radcam
