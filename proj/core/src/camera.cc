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

#include "radcam/camera.h"

#include <string>

namespace radcam {

void ValidatePyramid(const std::vector<Tensor>& levels) {
  if (levels.empty()) throw DataError("camera has no feature levels");
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const Tensor& t = levels[l];
    if (t.rank() != 3) {
      throw DataError("feature level " + std::to_string(l) + " is not [H x W x C]");
    }
    if (t.dim(2) != levels[0].dim(2)) {
      throw DataError("feature level " + std::to_string(l) + " has " + std::to_string(t.dim(2)) +
                      " channels, level 0 has " + std::to_string(levels[0].dim(2)));
    }
    if (l == 0) continue;
    const Tensor& prev = levels[l - 1];
    if (prev.dim(0) != 2 * t.dim(0) || prev.dim(1) != 2 * t.dim(1)) {
      throw DataError("feature level " + std::to_string(l) + " " + ShapeString(t.shape()) +
                      " is not half of level " + std::to_string(l - 1) + " " +
                      ShapeString(prev.shape()));
    }
  }
}

std::vector<CameraFeatures> LoadFeatures(const SceneRecord& scene) {
  if (scene.features.size() != scene.cameras.size()) {
    throw DataError("scene " + scene.scene_id + " has " + std::to_string(scene.cameras.size()) +
                    " cameras but " + std::to_string(scene.features.size()) + " feature pyramids");
  }
  std::vector<CameraFeatures> out;
  out.reserve(scene.cameras.size());
  int channels = -1;
  for (std::size_t i = 0; i < scene.cameras.size(); ++i) {
    ValidatePyramid(scene.features[i]);
    if (scene.cameras[i].feature_scale.size() != scene.features[i].size()) {
      throw DataError("camera " + std::to_string(i) + " declares " +
                      std::to_string(scene.cameras[i].feature_scale.size()) +
                      " feature scales for " + std::to_string(scene.features[i].size()) +
                      " levels");
    }
    const int c = scene.features[i][0].dim(2);
    if (channels >= 0 && c != channels) throw DataError("cameras disagree on channel count");
    channels = c;
    out.push_back(CameraFeatures{scene.cameras[i], scene.features[i]});
  }
  return out;
}

}  // namespace radcam
