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

#ifndef RADCAM_CAMERA_H_
#define RADCAM_CAMERA_H_

#include <vector>

#include "radcam/geometry.h"
#include "radcam/scene.h"
#include "radcam/tensor.h"

namespace radcam {

// Multi-scale feature pyramid of one camera. Level l+1 is exactly half of
// level l in both spatial dimensions; all levels share one channel count.
struct CameraFeatures {
  CameraModel model;
  std::vector<Tensor> levels;

  int channels() const { return levels.front().dim(2); }
};

// Validates and returns the per-camera pyramids of a scene. Values are not
// modified. Throws DataError on any level-shape violation.
std::vector<CameraFeatures> LoadFeatures(const SceneRecord& scene);

void ValidatePyramid(const std::vector<Tensor>& levels);

}  // namespace radcam

#endif  // RADCAM_CAMERA_H_
