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

// Synthetic scenes: boxes on a ground plane, multi-sweep radar returns with
// anisotropic noise, and per-camera feature pyramids made of Gaussian splats.

#ifndef RADCAM_SCENE_SIM_H_
#define RADCAM_SCENE_SIM_H_

#include <cstdint>
#include <string>

#include "radcam/geometry.h"
#include "radcam/scene.h"

namespace radcam {

struct SimConfig {
  BevGridSpec grid;
  double margin = 1.0;            // keep box centers this far inside the grid
  double min_ego_distance = 3.0;  // no boxes on top of the ego vehicle
  int min_objects = 3;
  int max_objects = 15;
  int min_returns = 1;  // per box, over all sweeps
  int max_returns = 8;
  int min_clutter = 5;  // per scene
  int max_clutter = 20;
  double radial_noise = 0.1;     // m
  double tangential_ratio = 3.0; // sigma_tangential / sigma_radial
  double doppler_noise = 0.1;    // m/s
  int num_sweeps = 7;
  double sweep_period = 0.075;   // s
  double max_ego_speed = 10.0;   // m/s along +x
  int num_cameras = 6;
  int image_width = 320;
  int image_height = 192;
  double camera_hfov = 70.0 * kPi / 180.0;
  double camera_height = 1.5;
  int feature_levels = 3;
  int feature_stride = 8;  // image pixels per level-0 feature pixel
  double feature_noise = 0.02;

  // Throws ConfigError on inconsistent settings.
  void Validate() const;
  std::vector<CameraModel> MakeCameras() const;
};

// Typical (w, l, h) in meters.
Vec3 ClassSize(ObjectClass c);

// Pure function of (config, seed). `scene_id` defaults to one derived from
// the seed.
SceneRecord GenerateScene(const SimConfig& config, std::uint64_t seed,
                          const std::string& scene_id = "");

// Point on the vertical faces of `box` that look toward `sensor`.
// `edge_draw` in [0, 1) walks the visible perimeter, `height_draw` in [0, 1]
// spans the box height.
Vec3 SampleFacingSurface(const Box3d& box, const Vec3& sensor, double edge_draw, double height_draw);

}  // namespace radcam

#endif  // RADCAM_SCENE_SIM_H_
