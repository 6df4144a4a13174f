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

#include <gtest/gtest.h>

#include <cmath>

#include "radcam/scene_sim.h"

namespace radcam {
namespace {

SimConfig SmallConfig() {
  SimConfig c;
  c.grid.channels = 8;
  return c;
}

// Distance from p to the perimeter of the box footprint, and whether p's
// height is within the box.
double PerimeterDistance(const Vec3& p, const Box3d& b) {
  const Vec2 fwd(std::cos(b.yaw), std::sin(b.yaw));
  const Vec2 d = p.head<2>() - b.center.head<2>();
  const double x = std::abs(d.dot(fwd)), y = std::abs(d.dot(Vec2(-fwd.y(), fwd.x())));
  const double hl = 0.5 * b.size.y(), hw = 0.5 * b.size.x();
  if (x <= hl && y <= hw) return std::min(hl - x, hw - y);
  return std::hypot(std::max(0.0, x - hl), std::max(0.0, y - hw));
}

bool InHeight(const Vec3& p, const Box3d& b) {
  return std::abs(p.z() - b.center.z()) <= 0.5 * b.size.z() + 1e-12;
}

TEST(Sim, SameSeedSameScene) {
  const SimConfig cfg = SmallConfig();
  const SceneRecord a = GenerateScene(cfg, 42), b = GenerateScene(cfg, 42);
  ASSERT_EQ(a.gt.size(), b.gt.size());
  for (std::size_t i = 0; i < a.gt.size(); ++i) EXPECT_EQ(a.gt[i].center, b.gt[i].center);
  for (std::size_t s = 0; s < a.sweeps.size(); ++s) {
    ASSERT_EQ(a.sweeps[s].points.size(), b.sweeps[s].points.size());
    for (std::size_t k = 0; k < a.sweeps[s].points.size(); ++k) {
      EXPECT_EQ(a.sweeps[s].points[k].position, b.sweeps[s].points[k].position);
    }
  }
  for (std::size_t c = 0; c < a.features.size(); ++c) {
    for (std::size_t l = 0; l < a.features[c].size(); ++l) {
      EXPECT_EQ(a.features[c][l].values(), b.features[c][l].values());
    }
  }
  EXPECT_EQ(a.scene_id, b.scene_id);
  EXPECT_NE(GenerateScene(cfg, 43).scene_id, a.scene_id);
}

TEST(Sim, ObjectCountWithinRange) {
  SimConfig cfg = SmallConfig();
  cfg.num_cameras = 1;
  int lo = 100, hi = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const int n = static_cast<int>(GenerateScene(cfg, seed).gt.size());
    lo = std::min(lo, n);
    hi = std::max(hi, n);
  }
  EXPECT_EQ(lo, 3);
  EXPECT_EQ(hi, 15);
}

TEST(Sim, NoiselessReturnsLieOnBoxesAndEveryBoxIsHit) {
  SimConfig cfg = SmallConfig();
  cfg.radial_noise = 0;
  cfg.min_clutter = cfg.max_clutter = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const SceneRecord scene = GenerateScene(cfg, seed);
    std::vector<int> hits(scene.gt.size(), 0);
    for (const RadarSweep& sweep : scene.sweeps) {
      const double age = scene.current_time - sweep.timestamp;
      for (const RadarPoint& p : sweep.points) {
        bool on_box = false;
        for (std::size_t i = 0; i < scene.gt.size(); ++i) {
          Box3d past = scene.gt[i];
          past.center.head<2>() -= past.velocity * age;
          past.center -= sweep.ego_pose.translation;
          if (PerimeterDistance(p.position, past) < 1e-9 && InHeight(p.position, past)) {
            on_box = true;
            ++hits[i];
            break;
          }
        }
        EXPECT_TRUE(on_box) << "seed " << seed;
      }
    }
    for (int h : hits) EXPECT_GE(h, 1) << "seed " << seed;
  }
}

TEST(Sim, TangentialNoiseThreeTimesRadial) {
  SimConfig noisy = SmallConfig();
  noisy.num_cameras = 1;
  SimConfig clean = noisy;
  clean.radial_noise = 0;
  double rr = 0, tt = 0;
  long n = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const SceneRecord a = GenerateScene(noisy, seed), b = GenerateScene(clean, seed);
    for (std::size_t s = 0; s < a.sweeps.size(); ++s) {
      ASSERT_EQ(a.sweeps[s].points.size(), b.sweeps[s].points.size());
      for (std::size_t k = 0; k < a.sweeps[s].points.size(); ++k) {
        const Vec2 base = b.sweeps[s].points[k].position.head<2>();
        const Vec2 d = a.sweeps[s].points[k].position.head<2>() - base;
        if (d.norm() == 0) continue;  // clutter
        const Vec2 radial = base.normalized();
        const double r = d.dot(radial), t = d.dot(Vec2(-radial.y(), radial.x()));
        rr += r * r;
        tt += t * t;
        ++n;
      }
    }
  }
  ASSERT_GT(n, 1000);
  const double ratio = std::sqrt(tt / rr);
  EXPECT_NEAR(ratio, 3.0, 0.3);
  EXPECT_NEAR(std::sqrt(rr / n), noisy.radial_noise, 0.01);
}

TEST(Sim, FeaturePyramidMatchesCameras) {
  const SimConfig cfg = SmallConfig();
  const SceneRecord s = GenerateScene(cfg, 7);
  ASSERT_EQ(s.cameras.size(), 6u);
  ASSERT_EQ(s.features.size(), 6u);
  for (const auto& levels : s.features) {
    ASSERT_EQ(levels.size(), 3u);
    EXPECT_EQ(levels[0].shape(), (Shape{24, 40, 8}));
    EXPECT_EQ(levels[2].shape(), (Shape{6, 10, 8}));
  }
  EXPECT_EQ(s.sweeps.size(), 7u);
}

TEST(Sim, BoxesInsideGridAndAwayFromEgo) {
  const SimConfig cfg = SmallConfig();
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    for (const Box3d& b : GenerateScene(cfg, seed).gt) {
      EXPECT_GE(b.center.head<2>().norm(), cfg.min_ego_distance);
      EXPECT_GE(b.center.x(), cfg.grid.x_min + cfg.margin);
      EXPECT_LE(b.center.y(), cfg.grid.y_max - cfg.margin);
    }
  }
}

TEST(Sim, FacingSurfaceSeesOnlyNearSide) {
  Box3d b;
  b.center = Vec3(10, 0, 1);
  b.size = Vec3(2, 4, 2);
  for (int i = 0; i < 50; ++i) {
    const Vec3 p = SampleFacingSurface(b, Vec3::Zero(), i / 50.0, 0.5);
    EXPECT_LT(PerimeterDistance(p, b), 1e-12);
    EXPECT_LE(p.x(), 10 + 1e-12);
  }
}

TEST(Sim, InvalidConfigThrows) {
  SimConfig cfg = SmallConfig();
  cfg.min_objects = 5;
  cfg.max_objects = 2;
  EXPECT_THROW(GenerateScene(cfg, 1), ConfigError);
}

}  // namespace
}  // namespace radcam
