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

// Desk-scale training: full-batch steps over all training scenes, first the
// encoder and head, then the refinement stage on frozen proposals.

#ifndef RADCAM_TRAIN_H_
#define RADCAM_TRAIN_H_

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "radcam/model.h"

namespace radcam {

struct LossRecord {
  std::string phase;  // "first" or "refine"
  int step = 0;
  double total = 0;
  double heatmap = 0;     // first stage only
  double regression = 0;  // L1 term of either stage
};

// Adam (or plain gradient descent) over a fixed parameter list.
class Optimizer {
 public:
  Optimizer(const ParamList& params, bool adam);
  void Step(const std::vector<Tensor>& grads, double lr);

 private:
  ParamList params_;
  bool adam_;
  int t_ = 0;
  std::vector<Tensor> m_, v_;
};

using SceneList = std::span<const std::unique_ptr<PreparedScene>>;

void TrainFirstStage(ModelParams& params, SceneList scenes, const RunConfig& config,
                     std::vector<LossRecord>* log);

// One refinement training example: a frozen proposal with its inputs.
struct RefineSample {
  RefinementInputs inputs;
  bool matched = false;
  std::vector<double> target;  // 9 residuals toward the matched gt
};

std::vector<RefineSample> MakeRefineSamples(const PreparedScene& scene, const ModelParams& params,
                                            const RunConfig& config);

void TrainRefinement(ModelParams& params, SceneList scenes, const RunConfig& config,
                     std::vector<LossRecord>* log);

// Both phases; the refinement phase runs only when rgpp is enabled.
ModelParams Train(const RunConfig& config, SceneList scenes, std::vector<LossRecord>* log);

std::string LossLogCsv(std::span<const LossRecord> log);

}  // namespace radcam

#endif  // RADCAM_TRAIN_H_
