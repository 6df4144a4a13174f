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

#ifndef RADCAM_SCENE_H_
#define RADCAM_SCENE_H_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "radcam/geometry.h"
#include "radcam/radar.h"
#include "radcam/tensor.h"

namespace radcam {

enum class ObjectClass { kCar = 0, kPedestrian = 1, kCycle = 2 };
constexpr int kNumClasses = 3;

std::string_view ClassName(ObjectClass c);
ObjectClass ClassFromName(std::string_view name);  // throws DataError

// 3D box: center, (w, l, h) with l along the heading, yaw, planar velocity.
struct Box3d {
  Vec3 center = Vec3::Zero();
  Vec3 size = Vec3::Ones();
  double yaw = 0;
  Vec2 velocity = Vec2::Zero();
  ObjectClass label = ObjectClass::kCar;
};

struct SceneRecord {
  std::string scene_id;
  std::vector<Box3d> gt;
  std::vector<RadarSweep> sweeps;
  double current_time = 0;
  std::vector<CameraModel> cameras;
  // features[camera][level] is an [H_l x W_l x C] raster.
  std::vector<std::vector<Tensor>> features;
  std::uint64_t seed = 0;
};

}  // namespace radcam

#endif  // RADCAM_SCENE_H_
