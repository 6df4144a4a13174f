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

// JSON serialization of scenes, detections and metrics, plus file helpers.
// Every writer is deterministic: keys are sorted and doubles are printed in
// their shortest round-trip form.

#ifndef RADCAM_IO_H_
#define RADCAM_IO_H_

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "radcam/eval.h"
#include "radcam/scene.h"

namespace radcam {

std::string Base64Encode(std::span<const unsigned char> bytes);
std::vector<unsigned char> Base64Decode(std::string_view text);  // throws DataError

// Scene JSON: scene_id, seed, current_time, gt, sweeps, cameras, features.
// Feature rasters are {shape, dtype: "f32le", data: base64}.
std::string SceneToJson(const SceneRecord& scene);
SceneRecord SceneFromJson(std::string_view text);

// {scene_id: [{center, size, yaw, velocity, score, class}, ...], ...}
std::string DetectionsToJson(std::span<const SceneDetections> dets);
std::vector<SceneDetections> DetectionsFromJson(std::string_view text);

std::string MetricsToJson(const Metrics& metrics);

std::string ReadFile(const std::filesystem::path& path);  // throws DataError
void WriteFile(const std::filesystem::path& path, std::string_view contents);

// Scene files (*.json other than manifest.json) in `dir`, sorted by name.
std::vector<std::filesystem::path> ListSceneFiles(const std::filesystem::path& dir);
SceneRecord ReadScene(const std::filesystem::path& path);

}  // namespace radcam

#endif  // RADCAM_IO_H_
