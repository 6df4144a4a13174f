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

#include "radcam/scene_sim.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "radcam/random.h"

namespace radcam {
namespace {

void Require(bool ok, const char* what) {
  if (!ok) throw ConfigError(std::string("invalid sim config: ") + what);
}

double MaxSpeed(ObjectClass c) {
  switch (c) {
    case ObjectClass::kCar:
      return 10.0;
    case ObjectClass::kPedestrian:
      return 1.5;
    case ObjectClass::kCycle:
      return 5.0;
  }
  return 0.0;
}

double MeanRcs(ObjectClass c) {
  switch (c) {
    case ObjectClass::kCar:
      return 10.0;
    case ObjectClass::kPedestrian:
      return -3.0;
    case ObjectClass::kCycle:
      return 2.0;
  }
  return 0.0;
}

bool Overlaps(const Box3d& a, const Box3d& b) {
  const double ra = 0.5 * std::hypot(a.size.x(), a.size.y());
  const double rb = 0.5 * std::hypot(b.size.x(), b.size.y());
  return (a.center.head<2>() - b.center.head<2>()).norm() < ra + rb;
}

std::vector<Box3d> SampleBoxes(const SimConfig& config, Rng& rng) {
  const int n = rng.UniformInt(config.min_objects, config.max_objects);
  const BevGridSpec& g = config.grid;
  std::vector<Box3d> boxes;
  for (int i = 0; i < n; ++i) {
    Box3d box;
    box.label = static_cast<ObjectClass>(rng.UniformInt(0, kNumClasses - 1));
    const Vec3 typical = ClassSize(box.label);
    for (int k = 0; k < 3; ++k) box.size[k] = typical[k] * rng.Uniform(0.9, 1.1);
    box.yaw = WrapAngle(rng.Uniform(-kPi, kPi));
    const double speed = rng.Uniform(0.0, MaxSpeed(box.label));
    box.velocity = speed * Vec2(std::cos(box.yaw), std::sin(box.yaw));
    // Rejection sampling; the draw count per attempt is fixed so the stream
    // stays aligned.
    bool placed = false;
    for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
      box.center = Vec3(rng.Uniform(g.x_min + config.margin, g.x_max - config.margin),
                        rng.Uniform(g.y_min + config.margin, g.y_max - config.margin),
                        0.5 * box.size.z());
      if (box.center.head<2>().norm() < config.min_ego_distance) continue;
      placed = std::none_of(boxes.begin(), boxes.end(),
                            [&](const Box3d& other) { return Overlaps(box, other); });
    }
    if (!placed) throw ConfigError("grid too small to place " + std::to_string(n) + " boxes");
    boxes.push_back(box);
  }
  return boxes;
}

Tensor ClassPattern(int channels) {
  Tensor p({kNumClasses, channels});
  for (int c = 0; c < kNumClasses; ++c) {
    for (int j = 0; j < channels; ++j) p.at(c, j) = j % kNumClasses == c ? 1.0 : 0.0;
  }
  return p;
}

}  // namespace

void SimConfig::Validate() const {
  grid.Validate(false);
  Require(min_objects >= 1 && min_objects <= max_objects, "object count range");
  Require(min_returns >= 0 && min_returns <= max_returns, "returns per box range");
  Require(min_clutter >= 0 && min_clutter <= max_clutter, "clutter range");
  Require(radial_noise >= 0 && tangential_ratio >= 0 && doppler_noise >= 0, "noise scales");
  Require(num_sweeps >= 1 && sweep_period > 0, "sweep settings");
  Require(max_ego_speed >= 0, "ego speed");
  Require(margin >= 0 && min_ego_distance >= 0, "placement margins");
  Require(num_cameras >= 1 && image_width > 0 && image_height > 0, "camera rig");
  Require(camera_hfov > 0 && camera_hfov < kPi, "camera field of view");
  Require(feature_levels >= 1 && feature_stride >= 1, "feature pyramid");
  const int coarse = feature_stride << (feature_levels - 1);
  Require(image_width % coarse == 0 && image_height % coarse == 0,
          "image size must divide into every pyramid level");
  Require(feature_noise >= 0, "feature noise");
}

std::vector<CameraModel> SimConfig::MakeCameras() const {
  std::vector<double> scales;
  for (int l = 0; l < feature_levels; ++l) scales.push_back(1.0 / (feature_stride << l));
  std::vector<CameraModel> cams;
  for (int i = 0; i < num_cameras; ++i) {
    const double yaw = WrapAngle(2.0 * kPi * i / num_cameras);
    cams.push_back(CameraModel::Looking(yaw, Vec3(0, 0, camera_height), image_width, image_height,
                                        camera_hfov, scales));
  }
  return cams;
}

Vec3 ClassSize(ObjectClass c) {
  switch (c) {
    case ObjectClass::kCar:
      return Vec3(1.9, 4.6, 1.7);
    case ObjectClass::kPedestrian:
      return Vec3(0.7, 0.7, 1.75);
    case ObjectClass::kCycle:
      return Vec3(0.7, 1.8, 1.4);
  }
  throw DataError("unknown object class");
}

Vec3 SampleFacingSurface(const Box3d& box, const Vec3& sensor, double edge_draw,
                         double height_draw) {
  const Vec2 c = box.center.head<2>();
  const Vec2 fwd(std::cos(box.yaw), std::sin(box.yaw));
  const Vec2 left(-fwd.y(), fwd.x());
  const double hl = 0.5 * box.size.y();
  const double hw = 0.5 * box.size.x();
  // Corners counter-clockwise; edge i runs from corner i to corner i + 1.
  const std::array<Vec2, 4> corners = {c + hl * fwd - hw * left, c + hl * fwd + hw * left,
                                       c - hl * fwd + hw * left, c - hl * fwd - hw * left};
  const std::array<Vec2, 4> normals = {fwd, left, -fwd, -left};
  std::array<bool, 4> visible{};
  double total = 0;
  for (int i = 0; i < 4; ++i) {
    const Vec2 mid = 0.5 * (corners[i] + corners[(i + 1) % 4]);
    visible[i] = normals[i].dot(sensor.head<2>() - mid) > 0;
    if (visible[i]) total += (corners[(i + 1) % 4] - corners[i]).norm();
  }
  if (total == 0) {
    visible.fill(true);
    total = 2 * (box.size.x() + box.size.y());
  }
  double t = std::clamp(edge_draw, 0.0, 1.0) * total;
  Vec2 xy = corners[0];
  for (int i = 0; i < 4; ++i) {
    if (!visible[i]) continue;
    const Vec2 a = corners[i];
    const Vec2 b = corners[(i + 1) % 4];
    const double len = (b - a).norm();
    xy = a + (b - a) * std::min(1.0, t / len);
    if (t <= len) break;
    t -= len;
  }
  const double z = box.center.z() + (std::clamp(height_draw, 0.0, 1.0) - 0.5) * box.size.z();
  return Vec3(xy.x(), xy.y(), z);
}

SceneRecord GenerateScene(const SimConfig& config, std::uint64_t seed,
                          const std::string& scene_id) {
  config.Validate();
  SceneRecord scene;
  scene.seed = seed;
  if (scene_id.empty()) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "scene-%016llx", static_cast<unsigned long long>(seed));
    scene.scene_id = buf;
  } else {
    scene.scene_id = scene_id;
  }

  Rng box_rng(DeriveSeed(seed, "boxes"));
  Rng radar_rng(DeriveSeed(seed, "radar"));
  Rng clutter_rng(DeriveSeed(seed, "clutter"));
  Rng feature_rng(DeriveSeed(seed, "features"));

  scene.gt = SampleBoxes(config, box_rng);
  const double ego_speed = box_rng.Uniform(0.0, config.max_ego_speed);

  // Sweep s is s periods old; its frame origin sits behind the current one.
  scene.current_time = (config.num_sweeps - 1) * config.sweep_period;
  for (int s = 0; s < config.num_sweeps; ++s) {
    RadarSweep sweep;
    const double age = s * config.sweep_period;
    sweep.timestamp = scene.current_time - age;
    sweep.ego_pose = RigidTransform::FromYawTranslation(0.0, Vec3(-ego_speed * age, 0, 0));
    scene.sweeps.push_back(sweep);
  }

  const double sigma_r = config.radial_noise;
  const double sigma_t = config.radial_noise * config.tangential_ratio;
  for (const Box3d& box : scene.gt) {
    const int n = radar_rng.UniformInt(config.min_returns, config.max_returns);
    for (int i = 0; i < n; ++i) {
      const int s = radar_rng.UniformInt(0, config.num_sweeps - 1);
      RadarSweep& sweep = scene.sweeps[s];
      const double age = scene.current_time - sweep.timestamp;
      Box3d past = box;
      past.center.head<2>() -= box.velocity * age;
      past.center -= sweep.ego_pose.translation;  // into the sweep frame
      const double edge = radar_rng.Uniform(0.0, 1.0);
      const double height = radar_rng.Uniform(0.0, 1.0);
      Vec3 p = SampleFacingSurface(past, Vec3::Zero(), edge, height);
      const Vec2 radial = p.head<2>().norm() > 1e-9 ? Vec2(p.head<2>().normalized()) : Vec2(1, 0);
      const Vec2 tangential(-radial.y(), radial.x());
      const double nr = radar_rng.Normal(0.0, sigma_r);
      const double nt = radar_rng.Normal(0.0, sigma_t);
      p.head<2>() += nr * radial + nt * tangential;
      RadarPoint point;
      point.position = p;
      point.rcs = radar_rng.Normal(MeanRcs(box.label), 2.0);
      const double doppler = box.velocity.dot(radial) + radar_rng.Normal(0.0, config.doppler_noise);
      point.velocity = doppler * radial;
      sweep.points.push_back(point);
    }
  }

  const BevGridSpec& g = config.grid;
  const int clutter = clutter_rng.UniformInt(config.min_clutter, config.max_clutter);
  for (int i = 0; i < clutter; ++i) {
    const int s = clutter_rng.UniformInt(0, config.num_sweeps - 1);
    RadarPoint point;
    point.position = Vec3(clutter_rng.Uniform(g.x_min, g.x_max), clutter_rng.Uniform(g.y_min, g.y_max),
                          clutter_rng.Uniform(0.0, 2.0));
    point.rcs = clutter_rng.Normal(-5.0, 3.0);
    const Vec2 xy = point.position.head<2>();
    const Vec2 radial = xy.norm() > 1e-9 ? Vec2(xy.normalized()) : Vec2(1, 0);
    point.velocity = clutter_rng.Normal(0.0, 0.5) * radial;
    scene.sweeps[s].points.push_back(point);
  }

  scene.cameras = config.MakeCameras();
  const int channels = g.channels;
  const Tensor pattern = ClassPattern(channels);
  for (const CameraModel& cam : scene.cameras) {
    std::vector<Tensor> levels;
    const double f = cam.intrinsics(0, 0);
    for (int l = 0; l < config.feature_levels; ++l) {
      const double scale = cam.feature_scale[l];
      const int h = static_cast<int>(std::lround(config.image_height * scale));
      const int w = static_cast<int>(std::lround(config.image_width * scale));
      Tensor raster({h, w, channels});
      for (const Box3d& box : scene.gt) {
        const Vec3 pc = cam.ego_to_camera.Apply(box.center);
        if (pc.z() <= kMinProjectionDepth) continue;
        const Vec3 hp = cam.intrinsics * pc;
        const double u = hp.x() / hp.z() * scale;
        const double v = hp.y() / hp.z() * scale;
        const double sigma = std::max(0.5, scale * f * 0.5 * box.size.z() / pc.z());
        const int reach = static_cast<int>(std::ceil(3 * sigma));
        const int cls = static_cast<int>(box.label);
        for (int i = std::max(0, static_cast<int>(v) - reach);
             i <= std::min(h - 1, static_cast<int>(v) + reach); ++i) {
          for (int j = std::max(0, static_cast<int>(u) - reach);
               j <= std::min(w - 1, static_cast<int>(u) + reach); ++j) {
            const double d2 = (j - u) * (j - u) + (i - v) * (i - v);
            const double a = std::exp(-0.5 * d2 / (sigma * sigma));
            for (int c = 0; c < channels; ++c) raster.at(i, j, c) += a * pattern.at(cls, c);
          }
        }
      }
      // Noise is drawn for every element so the stream does not depend on
      // which splats landed; values are stored at fp32 precision.
      for (double& x : raster.mutable_data()) {
        x = static_cast<double>(static_cast<float>(x + feature_rng.Normal(0.0, config.feature_noise)));
      }
      levels.push_back(std::move(raster));
    }
    scene.features.push_back(std::move(levels));
  }
  return scene;
}

}  // namespace radcam
