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

// The full detector: radar pillars, BEV encoder, center head and proposal
// refinement, wired according to the run's ablation flags.

#ifndef RADCAM_MODEL_H_
#define RADCAM_MODEL_H_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "radcam/bev_encoder.h"
#include "radcam/camera.h"
#include "radcam/config.h"
#include "radcam/detection_head.h"
#include "radcam/eval.h"
#include "radcam/radar.h"
#include "radcam/refinement.h"

namespace radcam {

struct ModelParams {
  bool has_radar = false;   // pillar encoder present
  bool has_refine = false;  // refinement stage present
  PillarEncoderParams pillar;
  EncoderParams encoder;
  HeadParams head;
  RefinementParams refine;

  ParamList FirstStage();
  ParamList RefineStage();
  ParamList All();
};

EncoderOptions MakeEncoderOptions(const RunConfig& config);
AssociationConfig MakeAssociation(const RunConfig& config);
ModelParams InitModel(const RunConfig& config, std::uint64_t seed);

// Per-scene inputs that do not depend on learned weights. Holds pointers
// into its own camera features, so it is neither copied nor moved.
struct PreparedScene {
  std::string scene_id;
  std::vector<RadarPoint> points;  // accumulated and filtered
  std::vector<CameraFeatures> cameras;
  CrossAttentionGeometry geometry;
  std::vector<Box3d> gt;
  HeadTargets targets;

  PreparedScene() = default;
  PreparedScene(const PreparedScene&) = delete;
  PreparedScene& operator=(const PreparedScene&) = delete;
};

std::unique_ptr<PreparedScene> PrepareScene(const SceneRecord& scene, const RunConfig& config);

struct FirstStageOutput {
  Var bev;
  HeadOutput head;
};

FirstStageOutput FirstStageForward(ParamBinder& bind, const PreparedScene& scene,
                                   const ModelParams& params, const RunConfig& config);

std::vector<Proposal> ProposeScene(const PreparedScene& scene, const ModelParams& params,
                                   const RunConfig& config);

// Proposals, refined when rgpp is enabled, as scored detections.
std::vector<Detection> DetectScene(const PreparedScene& scene, const ModelParams& params,
                                   const RunConfig& config);

// Runs DetectScene over all scenes on config.threads workers.
std::vector<SceneDetections> DetectScenes(std::span<const std::unique_ptr<PreparedScene>> scenes,
                                          const ModelParams& params, const RunConfig& config);

std::vector<std::unique_ptr<PreparedScene>> PrepareScenes(std::span<const SceneRecord> scenes,
                                                          const RunConfig& config);

}  // namespace radcam

#endif  // RADCAM_MODEL_H_
