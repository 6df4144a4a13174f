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

#ifndef RADCAM_BEV_ENCODER_H_
#define RADCAM_BEV_ENCODER_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "radcam/autodiff.h"
#include "radcam/camera.h"
#include "radcam/geometry.h"
#include "radcam/mlp.h"

namespace radcam {

struct BevFeatureMap {
  Tensor values;  // [H x W x C]
  BevGridSpec spec;

  void Validate() const;
};

// Single-head deformable attention that builds the radar guided query.
// Value maps are the query itself and, when present, the radar BEV map.
struct GuidedQueryParams {
  std::vector<MlpParams> value_proj;  // one per value map, C -> C
  MlpParams offsets;                  // C -> maps * S * 2 (BEV pixels)
  MlpParams weights;                  // C -> maps * S, softmaxed jointly
  Tensor norm_gain, norm_bias;

  int num_maps() const { return static_cast<int>(value_proj.size()); }
  int sampling_points() const { return weights.out_width() / num_maps(); }
};

struct CrossAttentionParams {
  MlpParams offsets;  // C -> levels * S * 2 (feature pixels)
  MlpParams weights;  // C -> levels * S
  MlpParams output;   // C -> C
  int num_levels = 3;
};

struct GatingParams {
  MlpParams radar_mlp;  // MLP_0: C -> C
  Tensor conv_camera_weight, conv_camera_bias;
  Tensor conv_radar_weight, conv_radar_bias;
};

struct EncoderLayerParams {
  GuidedQueryParams query;
  CrossAttentionParams cross;
  GatingParams gating;
  Tensor norm1_gain, norm1_bias;
  MlpParams ffn;
  Tensor norm2_gain, norm2_bias;
};

struct EncoderOptions {
  bool radar_guided_query = true;  // RGBQ; off: self-attention over the query only
  bool gating = true;              // RCG; off: plain sum with the encoded radar map
  bool use_radar = true;           // off: camera-only feature path
  int sampling_points = 4;
  int num_levels = 3;
  int pillar_heights = 4;
  double pillar_z_min = -1.0;
  double pillar_z_max = 3.0;
  int ffn_width = 0;  // 0: 2C
};

struct EncoderParams {
  Tensor query;  // learnable BEV query [H x W x C]
  std::vector<EncoderLayerParams> layers;

  void AppendTo(ParamList& list, const std::string& prefix);
};

GuidedQueryParams MakeGuidedQuery(int channels, int num_maps, int sampling_points, Rng& rng);
CrossAttentionParams MakeCrossAttention(int channels, int num_levels, int sampling_points, Rng& rng);
GatingParams MakeGating(int channels, Rng& rng);
EncoderParams MakeEncoder(const BevGridSpec& spec, int num_layers, const EncoderOptions& options,
                          Rng& rng);

// Camera hits of every BEV pixel lifted to the pillar reference heights.
// Depends only on geometry, so it is built once per scene.
struct CrossAttentionGeometry {
  int num_pixels = 0;
  int num_levels = 0;
  std::vector<int> hit_pixel;     // one entry per valid (pixel, height, camera)
  std::vector<int> hit_camera;
  std::vector<double> hit_uv;     // [hits x levels x 2] feature-pixel coordinates
  std::vector<int> hits_per_pixel;
  std::vector<const Tensor*> maps;  // camera-major, then level

  int num_hits() const { return static_cast<int>(hit_pixel.size()); }
};

CrossAttentionGeometry BuildCrossAttentionGeometry(const BevGridSpec& spec,
                                                   std::span<const CameraFeatures> cameras,
                                                   const EncoderOptions& options);

// Q^RG: deformable attention of each pixel over the value maps, added to the
// query and layer-normalized. `radar` may be null (query-only attention).
Var RadarGuidedQuery(ParamBinder& bind, const Var& query, const Var* radar,
                     const GuidedQueryParams& params);

// B_C: query plus the projected mean of per-hit deformable samples. Pixels
// without any valid camera hit keep the query value.
Var SpatialCrossAttention(ParamBinder& bind, const Var& query,
                          const CrossAttentionGeometry& geometry,
                          const CrossAttentionParams& params);

struct GatingOutput {
  Var fused;           // B_RC
  Var radar_encoded;   // F'_R
  Var camera_gate;
  Var radar_gate;
};

GatingOutput RadarCameraGating(ParamBinder& bind, const Var& camera_bev, const Var& radar_bev,
                               const GatingParams& params);

// One encoder layer: query -> RGBQ -> SCA -> fusion -> add&norm -> FFN ->
// add&norm. `radar` is null on the camera-only path.
Var EncoderLayer(ParamBinder& bind, const Var& query, const Var* radar,
                 const CrossAttentionGeometry& geometry, const EncoderLayerParams& params,
                 const EncoderOptions& options);

// Runs all layers, starting from the learnable query.
Var Encode(ParamBinder& bind, const Var* radar, const CrossAttentionGeometry& geometry,
           const EncoderParams& params, const EncoderOptions& options);

BevFeatureMap Encode(const BevFeatureMap* radar, std::span<const CameraFeatures> cameras,
                     const EncoderParams& params, const EncoderOptions& options,
                     const BevGridSpec& spec);

}  // namespace radcam

#endif  // RADCAM_BEV_ENCODER_H_
