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

// Static SVG figures: precision-recall curves, loss curves and a BEV
// scatter of detections against ground truth.

#ifndef RADCAM_PLOTS_H_
#define RADCAM_PLOTS_H_

#include <span>
#include <string>

#include "radcam/eval.h"
#include "radcam/geometry.h"
#include "radcam/train.h"

namespace radcam {

std::string PrCurveSvg(const Metrics& metrics, ObjectClass label);
std::string LossCurveSvg(std::span<const LossRecord> log);
std::string BevScatterSvg(std::span<const Box3d> gt, std::span<const Detection> dets,
                          const BevGridSpec& spec, double min_score);

}  // namespace radcam

#endif  // RADCAM_PLOTS_H_
