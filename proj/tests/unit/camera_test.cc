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

#include "radcam/camera.h"
#include "radcam/scene.h"

namespace radcam {
namespace {

SceneRecord TwoCameraScene() {
  SceneRecord s;
  s.scene_id = "cams";
  for (int cam = 0; cam < 2; ++cam) {
    s.cameras.push_back(CameraModel::Looking(cam * kPi, Vec3::Zero(), 64, 32, 1.5, {0.25, 0.125, 0.0625}));
    std::vector<Tensor> levels;
    for (int l = 0; l < 3; ++l) {
      Tensor t({8 >> l, 16 >> l, 4});
      for (std::size_t i = 0; i < t.size(); ++i) t[i] = cam * 1000 + l * 100 + static_cast<double>(i);
      levels.push_back(t);
    }
    s.features.push_back(levels);
  }
  return s;
}

TEST(LoadFeatures, TwoCamerasThreeLevels) {
  const SceneRecord s = TwoCameraScene();
  const auto feats = LoadFeatures(s);
  ASSERT_EQ(feats.size(), 2u);
  for (int cam = 0; cam < 2; ++cam) {
    EXPECT_EQ(feats[cam].channels(), 4);
    ASSERT_EQ(feats[cam].levels.size(), 3u);
    for (int l = 0; l < 3; ++l) EXPECT_EQ(feats[cam].levels[l].values(), s.features[cam][l].values());
  }
}

TEST(LoadFeatures, NonHalvingLevelThrows) {
  SceneRecord s = TwoCameraScene();
  s.features[1][2] = Tensor({3, 2, 4});
  EXPECT_THROW(LoadFeatures(s), DataError);
}

TEST(LoadFeatures, ChannelMismatchThrows) {
  SceneRecord s = TwoCameraScene();
  s.features[0][1] = Tensor({4, 8, 5});
  EXPECT_THROW(LoadFeatures(s), DataError);
}

TEST(LoadFeatures, CameraCountMismatchThrows) {
  SceneRecord s = TwoCameraScene();
  s.features.pop_back();
  EXPECT_THROW(LoadFeatures(s), DataError);
}

TEST(LoadFeatures, ScaleCountMismatchThrows) {
  SceneRecord s = TwoCameraScene();
  s.cameras[0].feature_scale.pop_back();
  EXPECT_THROW(LoadFeatures(s), DataError);
}

TEST(LoadFeatures, AllZeroFeaturesAccepted) {
  SceneRecord s = TwoCameraScene();
  for (auto& levels : s.features) {
    for (auto& t : levels) t = Tensor::Zeros(t.shape());
  }
  EXPECT_NO_THROW(LoadFeatures(s));
}

TEST(ValidatePyramid, RejectsWrongRank) {
  EXPECT_THROW(ValidatePyramid({Tensor({4, 4})}), DataError);
  EXPECT_THROW(ValidatePyramid({}), DataError);
}

}  // namespace
}  // namespace radcam
