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

#include <benchmark/benchmark.h>

#include "radcam/config.h"
#include "radcam/eval.h"
#include "radcam/model.h"
#include "radcam/refinement.h"
#include "radcam/scene_sim.h"

namespace radcam {
namespace {

RunConfig DeskConfig() {
  RunConfig c;
  c.sim.grid.x_min = c.sim.grid.y_min = -16;
  c.sim.grid.x_max = c.sim.grid.y_max = 16;
  c.sim.grid.resolution = 1.0;
  c.sim.grid.channels = 8;
  c.sim.num_sweeps = 3;
  c.refine_hidden = c.attended_width = 16;
  c.num_grid_points = 32;
  return c;
}

void BM_Pillarize(benchmark::State& state) {
  const RunConfig c = DeskConfig();
  const auto scene = PrepareScene(GenerateScene(c.sim, 1), c);
  Rng rng(2);
  const PillarEncoderParams params = MakePillarEncoder(c.sim.grid.channels, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Pillarize(scene->points, c.sim.grid, params));
  }
  state.counters["points"] = static_cast<double>(scene->points.size());
}
BENCHMARK(BM_Pillarize);

void BM_EncodeForward(benchmark::State& state) {
  RunConfig c = DeskConfig();
  c.encoder_layers = static_cast<int>(state.range(0));
  const auto scene = PrepareScene(GenerateScene(c.sim, 1), c);
  const ModelParams params = InitModel(c, 3);
  for (auto _ : state) {
    Tape tape;
    tape.set_grad_enabled(false);
    ParamBinder bind(tape);
    benchmark::DoNotOptimize(FirstStageForward(bind, *scene, params, c).bev.value());
  }
}
BENCHMARK(BM_EncodeForward)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_EncodeTrainStep(benchmark::State& state) {
  const RunConfig c = DeskConfig();
  const auto scene = PrepareScene(GenerateScene(c.sim, 1), c);
  const ModelParams params = InitModel(c, 3);
  for (auto _ : state) {
    Tape tape;
    ParamBinder bind(tape);
    const FirstStageOutput out = FirstStageForward(bind, *scene, params, c);
    benchmark::DoNotOptimize(tape.Backward(HeadLoss(out.head, scene->targets).total));
  }
}
BENCHMARK(BM_EncodeTrainStep)->Unit(benchmark::kMillisecond);

void BM_FarthestPointSample(benchmark::State& state) {
  Rng rng(4);
  std::vector<Vec3> cand;
  for (int i = 0; i < state.range(0); ++i) {
    cand.emplace_back(rng.Uniform(-5, 5), rng.Uniform(-5, 5), 0.0);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(FarthestPointSample(cand, 64, Vec3::Zero()));
  }
}
BENCHMARK(BM_FarthestPointSample)->Arg(128)->Arg(512)->Arg(2048);

void BM_Evaluate(benchmark::State& state) {
  Rng rng(5);
  std::vector<SceneBoxes> gt;
  std::vector<SceneDetections> dets;
  for (int s = 0; s < state.range(0); ++s) {
    SceneBoxes sb{"s" + std::to_string(s), {}};
    SceneDetections sd{sb.scene_id, {}};
    for (int k = 0; k < 10; ++k) {
      Box3d b;
      b.center = Vec3(rng.Uniform(-30, 30), rng.Uniform(-30, 30), 1.0);
      b.label = static_cast<ObjectClass>(k % kNumClasses);
      sb.boxes.push_back(b);
      b.center.x() += rng.Normal(0, 1);
      sd.detections.push_back(Detection{b, rng.Uniform(0, 1)});
    }
    for (int k = 0; k < 20; ++k) {
      Box3d b;
      b.center = Vec3(rng.Uniform(-30, 30), rng.Uniform(-30, 30), 1.0);
      b.label = static_cast<ObjectClass>(k % kNumClasses);
      sd.detections.push_back(Detection{b, rng.Uniform(0, 0.5)});
    }
    gt.push_back(std::move(sb));
    dets.push_back(std::move(sd));
  }
  for (auto _ : state) benchmark::DoNotOptimize(Evaluate(gt, dets).nds);
}
BENCHMARK(BM_Evaluate)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace radcam

BENCHMARK_MAIN();
