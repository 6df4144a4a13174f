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

#include "radcam/bev_encoder.h"

#include <string>

namespace radcam {

void BevFeatureMap::Validate() const {
  if (values.rank() != 3 || values.dim(0) != spec.rows() || values.dim(1) != spec.cols() ||
      values.dim(2) != spec.channels) {
    throw ShapeError("bev map " + ShapeString(values.shape()) + " does not match its grid spec");
  }
}

namespace {

void AppendNorm(ParamList& list, const std::string& prefix, Tensor& gain, Tensor& bias) {
  list.emplace_back(prefix + ".gain", &gain);
  list.emplace_back(prefix + ".bias", &bias);
}

Var Norm(ParamBinder& bind, const Var& x, const Tensor& gain, const Tensor& bias) {
  return ops::LayerNorm(x, bind(gain), bind(bias));
}

// Flattens [H x W x C] to [HW x C].
Var Pixels(const Var& map) {
  const Shape& s = map.shape();
  return ops::Reshape(map, {s[0] * s[1], s[2]});
}

}  // namespace

GuidedQueryParams MakeGuidedQuery(int channels, int num_maps, int sampling_points, Rng& rng) {
  GuidedQueryParams p;
  for (int m = 0; m < num_maps; ++m) {
    p.value_proj.push_back(MakeMlp({channels, channels}, Activation::kNone, rng, Init::kIdentity));
  }
  p.offsets = MakeMlp({channels, num_maps * sampling_points * 2}, Activation::kNone, rng,
                      Init::kZero);
  p.weights = MakeMlp({channels, num_maps * sampling_points}, Activation::kNone, rng, Init::kZero);
  p.norm_gain = Tensor::Full({channels}, 1.0);
  p.norm_bias = Tensor({channels});
  return p;
}

CrossAttentionParams MakeCrossAttention(int channels, int num_levels, int sampling_points,
                                        Rng& rng) {
  CrossAttentionParams p;
  p.num_levels = num_levels;
  p.offsets = MakeMlp({channels, num_levels * sampling_points * 2}, Activation::kNone, rng,
                      Init::kZero);
  p.weights = MakeMlp({channels, num_levels * sampling_points}, Activation::kNone, rng,
                      Init::kZero);
  p.output = MakeMlp({channels, channels}, Activation::kNone, rng, Init::kIdentity);
  return p;
}

GatingParams MakeGating(int channels, Rng& rng) {
  GatingParams p;
  p.radar_mlp = MakeMlp({channels, channels}, Activation::kNone, rng);
  p.conv_camera_weight = MakeConvWeight(channels, channels, rng, 0.5);
  p.conv_camera_bias = Tensor({channels});
  p.conv_radar_weight = MakeConvWeight(channels, channels, rng, 0.5);
  p.conv_radar_bias = Tensor({channels});
  return p;
}

EncoderParams MakeEncoder(const BevGridSpec& spec, int num_layers, const EncoderOptions& options,
                          Rng& rng) {
  if (num_layers < 1) throw ConfigError("encoder needs at least one layer");
  const int c = spec.channels;
  EncoderParams p;
  p.query = Tensor({spec.rows(), spec.cols(), c});
  for (double& v : p.query.mutable_data()) v = rng.Normal(0.0, 1.0);
  const int maps = options.use_radar && options.radar_guided_query ? 2 : 1;
  const int ffn = options.ffn_width > 0 ? options.ffn_width : 2 * c;
  for (int l = 0; l < num_layers; ++l) {
    EncoderLayerParams layer;
    layer.query = MakeGuidedQuery(c, maps, options.sampling_points, rng);
    layer.cross = MakeCrossAttention(c, options.num_levels, options.sampling_points, rng);
    layer.gating = MakeGating(c, rng);
    layer.norm1_gain = Tensor::Full({c}, 1.0);
    layer.norm1_bias = Tensor({c});
    layer.ffn = MakeMlp({c, ffn, c}, Activation::kNone, rng);
    layer.norm2_gain = Tensor::Full({c}, 1.0);
    layer.norm2_bias = Tensor({c});
    p.layers.push_back(std::move(layer));
  }
  return p;
}

void EncoderParams::AppendTo(ParamList& list, const std::string& prefix) {
  list.emplace_back(prefix + ".query", &query);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    EncoderLayerParams& layer = layers[l];
    const std::string lp = prefix + ".layer" + std::to_string(l);
    for (std::size_t m = 0; m < layer.query.value_proj.size(); ++m) {
      AppendParams(list, lp + ".rgbq.value" + std::to_string(m), layer.query.value_proj[m]);
    }
    AppendParams(list, lp + ".rgbq.offsets", layer.query.offsets);
    AppendParams(list, lp + ".rgbq.weights", layer.query.weights);
    AppendNorm(list, lp + ".rgbq.norm", layer.query.norm_gain, layer.query.norm_bias);
    AppendParams(list, lp + ".sca.offsets", layer.cross.offsets);
    AppendParams(list, lp + ".sca.weights", layer.cross.weights);
    AppendParams(list, lp + ".sca.output", layer.cross.output);
    AppendParams(list, lp + ".rcg.mlp0", layer.gating.radar_mlp);
    list.emplace_back(lp + ".rcg.conv_c.weight", &layer.gating.conv_camera_weight);
    list.emplace_back(lp + ".rcg.conv_c.bias", &layer.gating.conv_camera_bias);
    list.emplace_back(lp + ".rcg.conv_r.weight", &layer.gating.conv_radar_weight);
    list.emplace_back(lp + ".rcg.conv_r.bias", &layer.gating.conv_radar_bias);
    AppendNorm(list, lp + ".norm1", layer.norm1_gain, layer.norm1_bias);
    AppendParams(list, lp + ".ffn", layer.ffn);
    AppendNorm(list, lp + ".norm2", layer.norm2_gain, layer.norm2_bias);
  }
}

CrossAttentionGeometry BuildCrossAttentionGeometry(const BevGridSpec& spec,
                                                   std::span<const CameraFeatures> cameras,
                                                   const EncoderOptions& options) {
  CrossAttentionGeometry g;
  const int rows = spec.rows(), cols = spec.cols();
  g.num_pixels = rows * cols;
  g.num_levels = options.num_levels;
  g.hits_per_pixel.assign(g.num_pixels, 0);
  std::vector<CameraModel> models;
  for (const CameraFeatures& cam : cameras) {
    if (static_cast<int>(cam.levels.size()) < options.num_levels) {
      throw DataError("camera pyramid has fewer levels than the cross attention uses");
    }
    models.push_back(cam.model);
    for (int l = 0; l < options.num_levels; ++l) g.maps.push_back(&cam.levels[l]);
  }
  const int heights = options.pillar_heights;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const Vec2 xy = spec.CellCenter(r, c);
      const int pixel = r * cols + c;
      for (int k = 0; k < heights; ++k) {
        const double z = heights == 1 ? options.pillar_z_min
                                      : options.pillar_z_min + (options.pillar_z_max -
                                                                options.pillar_z_min) *
                                                                   k / (heights - 1);
        const auto hits = ProjectToCameras(Vec3(xy.x(), xy.y(), z), models);
        for (const CameraHit& hit : hits) {
          if (!hit.valid) continue;
          g.hit_pixel.push_back(pixel);
          g.hit_camera.push_back(hit.camera);
          for (int l = 0; l < options.num_levels; ++l) {
            const double s = models[hit.camera].feature_scale[l];
            g.hit_uv.push_back(hit.uv.x() * s);
            g.hit_uv.push_back(hit.uv.y() * s);
          }
          ++g.hits_per_pixel[pixel];
        }
      }
    }
  }
  return g;
}

Var RadarGuidedQuery(ParamBinder& bind, const Var& query, const Var* radar,
                     const GuidedQueryParams& params) {
  const Shape& shape = query.shape();
  if (shape.size() != 3) throw ShapeError("guided query expects [H x W x C]");
  if (radar && radar->shape() != shape) {
    throw ShapeError("radar map " + ShapeString(radar->shape()) + " does not match query " +
                     ShapeString(shape));
  }
  const int num_maps = radar ? 2 : 1;
  if (params.num_maps() != num_maps) {
    throw ShapeError("guided query parameters built for " + std::to_string(params.num_maps()) +
                     " value maps, got " + std::to_string(num_maps));
  }
  const int rows = shape[0], cols = shape[1];
  const int n = rows * cols;
  const int s = params.sampling_points();
  Tape& tape = bind.tape();

  Var flat = Pixels(query);
  Var offsets = MlpForward(bind, params.offsets, flat);                // [N x maps*S*2]
  Var weights = ops::Softmax(MlpForward(bind, params.weights, flat));  // [N x maps*S]

  Tensor ref({n * s, 2});
  for (int p = 0; p < n; ++p) {
    for (int k = 0; k < s; ++k) {
      ref[2 * (p * s + k)] = p % cols;
      ref[2 * (p * s + k) + 1] = p / cols;
    }
  }
  Var ref_var = tape.Constant(std::move(ref));

  std::vector<Var> value_maps = {query};
  if (radar) value_maps.push_back(*radar);
  Var total;
  for (int m = 0; m < num_maps; ++m) {
    Var projected = MlpForward(bind, params.value_proj[m], value_maps[m]);
    Var off = ops::Reshape(ops::SliceCols(offsets, m * s * 2, (m + 1) * s * 2), {n * s, 2});
    Var samples = ops::BilinearGather(projected, ops::Add(off, ref_var));
    Var part = ops::WeightedGroupSum(samples, ops::SliceCols(weights, m * s, (m + 1) * s));
    total = m == 0 ? part : ops::Add(total, part);
  }
  Var out = ops::Add(flat, total);
  out = Norm(bind, out, params.norm_gain, params.norm_bias);
  return ops::Reshape(out, shape);
}

Var SpatialCrossAttention(ParamBinder& bind, const Var& query,
                          const CrossAttentionGeometry& geometry,
                          const CrossAttentionParams& params) {
  const Shape& shape = query.shape();
  if (shape.size() != 3 || shape[0] * shape[1] != geometry.num_pixels) {
    throw ShapeError("cross attention query " + ShapeString(shape) +
                     " does not match the hit geometry");
  }
  const int hits = geometry.num_hits();
  if (hits == 0) return query;
  const int levels = params.num_levels;
  if (levels != geometry.num_levels) throw ShapeError("cross attention level count mismatch");
  const int s = params.weights.out_width() / levels;
  const int n = geometry.num_pixels;
  const int per_hit = levels * s;
  Tape& tape = bind.tape();

  Var flat = Pixels(query);
  Var offsets = MlpForward(bind, params.offsets, flat);
  Var weights = ops::Softmax(MlpForward(bind, params.weights, flat));

  Tensor base({hits * per_hit, 2});
  std::vector<int> map_index(static_cast<std::size_t>(hits) * per_hit);
  for (int h = 0; h < hits; ++h) {
    for (int l = 0; l < levels; ++l) {
      for (int k = 0; k < s; ++k) {
        const int row = (h * levels + l) * s + k;
        base[2 * row] = geometry.hit_uv[2 * (h * levels + l)];
        base[2 * row + 1] = geometry.hit_uv[2 * (h * levels + l) + 1];
        map_index[row] = geometry.hit_camera[h] * levels + l;
      }
    }
  }
  Var hit_offsets = ops::Reshape(ops::GatherRows(offsets, geometry.hit_pixel), {hits * per_hit, 2});
  Var uv = ops::Add(hit_offsets, tape.Constant(std::move(base)));
  Var samples = ops::BilinearGatherConst(geometry.maps, map_index, uv);
  Var per_hit_value = ops::WeightedGroupSum(samples, ops::GatherRows(weights, geometry.hit_pixel));
  Var summed = ops::SegmentSum(per_hit_value, geometry.hit_pixel, n);

  Tensor inv_count({n});
  Tensor covered({n});
  for (int p = 0; p < n; ++p) {
    if (geometry.hits_per_pixel[p] > 0) {
      inv_count[p] = 1.0 / geometry.hits_per_pixel[p];
      covered[p] = 1.0;
    }
  }
  Var attended = ops::ScaleRows(summed, tape.Constant(std::move(inv_count)));
  Var projected = ops::ScaleRows(MlpForward(bind, params.output, attended),
                                 tape.Constant(std::move(covered)));
  return ops::Reshape(ops::Add(flat, projected), shape);
}

GatingOutput RadarCameraGating(ParamBinder& bind, const Var& camera_bev, const Var& radar_bev,
                               const GatingParams& params) {
  if (camera_bev.shape() != radar_bev.shape() || camera_bev.shape().size() != 3) {
    throw ShapeError("gating inputs " + ShapeString(camera_bev.shape()) + " and " +
                     ShapeString(radar_bev.shape()) + " differ");
  }
  GatingOutput out;
  out.radar_encoded = MlpForward(bind, params.radar_mlp, radar_bev);
  Var joint = ops::Add(camera_bev, out.radar_encoded);
  out.camera_gate = ops::Sigmoid(
      ops::Conv3x3(joint, bind(params.conv_camera_weight), bind(params.conv_camera_bias)));
  out.radar_gate = ops::Sigmoid(
      ops::Conv3x3(joint, bind(params.conv_radar_weight), bind(params.conv_radar_bias)));
  out.fused = ops::Add(ops::Mul(out.camera_gate, camera_bev),
                       ops::Mul(out.radar_gate, out.radar_encoded));
  return out;
}

Var EncoderLayer(ParamBinder& bind, const Var& query, const Var* radar,
                 const CrossAttentionGeometry& geometry, const EncoderLayerParams& params,
                 const EncoderOptions& options) {
  const Shape shape = query.shape();
  const Var* guide = options.radar_guided_query ? radar : nullptr;
  Var guided = RadarGuidedQuery(bind, query, guide, params.query);
  Var camera_bev = SpatialCrossAttention(bind, guided, geometry, params.cross);
  Var fused = camera_bev;
  if (radar) {
    if (options.gating) {
      fused = RadarCameraGating(bind, camera_bev, *radar, params.gating).fused;
    } else {
      fused = ops::Add(camera_bev, MlpForward(bind, params.gating.radar_mlp, *radar));
    }
  }
  Var x = Norm(bind, Pixels(ops::Add(guided, fused)), params.norm1_gain, params.norm1_bias);
  Var y = Norm(bind, ops::Add(x, MlpForward(bind, params.ffn, x)), params.norm2_gain,
               params.norm2_bias);
  return ops::Reshape(y, shape);
}

Var Encode(ParamBinder& bind, const Var* radar, const CrossAttentionGeometry& geometry,
           const EncoderParams& params, const EncoderOptions& options) {
  if (params.layers.empty()) throw ConfigError("encoder needs at least one layer");
  const Var* used_radar = options.use_radar ? radar : nullptr;
  if (options.use_radar && radar == nullptr) {
    throw ContractError("encoder configured for radar but no radar map given");
  }
  Var q = bind(params.query);
  for (const EncoderLayerParams& layer : params.layers) {
    q = EncoderLayer(bind, q, used_radar, geometry, layer, options);
  }
  return q;
}

BevFeatureMap Encode(const BevFeatureMap* radar, std::span<const CameraFeatures> cameras,
                     const EncoderParams& params, const EncoderOptions& options,
                     const BevGridSpec& spec) {
  Tape tape;
  tape.set_grad_enabled(false);
  ParamBinder bind(tape);
  const CrossAttentionGeometry geometry = BuildCrossAttentionGeometry(spec, cameras, options);
  std::optional<Var> radar_var;
  if (radar) radar_var = tape.Constant(radar->values);
  Var out = Encode(bind, radar_var ? &*radar_var : nullptr, geometry, params, options);
  return BevFeatureMap{out.value(), spec};
}

}  // namespace radcam
