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

#include "radcam/model.h"

#include "radcam/parallel.h"

namespace radcam {

ParamList ModelParams::FirstStage() {
  ParamList list;
  if (has_radar) pillar.AppendTo(list, "radar");
  encoder.AppendTo(list, "encoder");
  head.AppendTo(list, "head");
  return list;
}

ParamList ModelParams::RefineStage() {
  ParamList list;
  if (has_refine) refine.AppendTo(list, "refine");
  return list;
}

ParamList ModelParams::All() {
  ParamList list = FirstStage();
  for (auto& entry : RefineStage()) list.push_back(entry);
  return list;
}

EncoderOptions MakeEncoderOptions(const RunConfig& config) {
  EncoderOptions o;
  o.radar_guided_query = config.ablation.rgbq;
  o.gating = config.ablation.rcg;
  o.use_radar = config.ablation.uses_radar_bev();
  o.sampling_points = config.sampling_points;
  o.num_levels = config.sim.feature_levels;
  o.pillar_heights = config.pillar_heights;
  o.ffn_width = config.ffn_width;
  return o;
}

AssociationConfig MakeAssociation(const RunConfig& config) {
  AssociationConfig a;
  a.azimuth_window = config.spa_azimuth_deg * kPi / 180.0;
  a.radial_window = config.spa_radial;
  a.Validate();
  return a;
}

ModelParams InitModel(const RunConfig& config, std::uint64_t seed) {
  config.Validate();
  const BevGridSpec& spec = config.sim.grid;
  const int c = spec.channels;
  ModelParams p;
  p.has_radar = config.ablation.uses_radar_bev();
  p.has_refine = config.ablation.rgpp;
  // Each block draws from its own stream so toggling one stage leaves the
  // others' initialization unchanged.
  Rng pillar_rng(DeriveSeed(seed, "init.radar"));
  Rng encoder_rng(DeriveSeed(seed, "init.encoder"));
  Rng head_rng(DeriveSeed(seed, "init.head"));
  Rng refine_rng(DeriveSeed(seed, "init.refine"));
  if (p.has_radar) p.pillar = MakePillarEncoder(c, pillar_rng);
  p.encoder = MakeEncoder(spec, config.encoder_layers, MakeEncoderOptions(config), encoder_rng);
  p.head = MakeHead(c, head_rng);
  if (p.has_refine) {
    p.refine = MakeRefinement(c, config.refine_hidden, config.attended_width, refine_rng,
                              config.encoding_frequencies);
    p.refine.rho_min = config.rho_min;
    p.refine.rho_max = config.rho_max;
    p.refine.grid_per_point = config.grid_per_point;
    p.refine.num_grid_points = config.num_grid_points;
    p.refine.Validate();
  }
  return p;
}

std::unique_ptr<PreparedScene> PrepareScene(const SceneRecord& scene, const RunConfig& config) {
  auto out = std::make_unique<PreparedScene>();
  const BevGridSpec& spec = config.sim.grid;
  out->scene_id = scene.scene_id;
  out->gt = scene.gt;
  const auto points = AccumulateSweeps(scene.sweeps, scene.current_time, config.max_sweeps);
  out->points = FilterPoints(
      points, RadarFilterConfig::ForGrid(spec, config.radar_max_speed, config.radar_min_rcs));
  out->cameras = LoadFeatures(scene);
  for (const CameraFeatures& cam : out->cameras) {
    if (cam.channels() != spec.channels) {
      throw DataError("scene " + scene.scene_id + " has " + std::to_string(cam.channels()) +
                      " feature channels, config expects " + std::to_string(spec.channels));
    }
    if (static_cast<int>(cam.levels.size()) != config.sim.feature_levels) {
      throw DataError("scene " + scene.scene_id + " has " + std::to_string(cam.levels.size()) +
                      " feature levels, config expects " +
                      std::to_string(config.sim.feature_levels));
    }
  }
  out->geometry = BuildCrossAttentionGeometry(spec, out->cameras, MakeEncoderOptions(config));
  out->targets = EncodeTargets(out->gt, spec);
  return out;
}

std::vector<std::unique_ptr<PreparedScene>> PrepareScenes(std::span<const SceneRecord> scenes,
                                                          const RunConfig& config) {
  std::vector<std::unique_ptr<PreparedScene>> out(scenes.size());
  ParallelFor(static_cast<int>(scenes.size()), config.threads,
              [&](int i) { out[i] = PrepareScene(scenes[i], config); });
  return out;
}

FirstStageOutput FirstStageForward(ParamBinder& bind, const PreparedScene& scene,
                                   const ModelParams& params, const RunConfig& config) {
  const EncoderOptions options = MakeEncoderOptions(config);
  FirstStageOutput out;
  if (options.use_radar) {
    if (!params.has_radar) throw ConfigError("model has no radar encoder for this ablation");
    Var radar = Pillarize(bind, scene.points, config.sim.grid, params.pillar);
    out.bev = Encode(bind, &radar, scene.geometry, params.encoder, options);
  } else {
    out.bev = Encode(bind, nullptr, scene.geometry, params.encoder, options);
  }
  out.head = HeadForward(bind, out.bev, params.head);
  return out;
}

std::vector<Proposal> ProposeScene(const PreparedScene& scene, const ModelParams& params,
                                   const RunConfig& config) {
  Tape tape;
  tape.set_grad_enabled(false);
  ParamBinder bind(tape);
  const FirstStageOutput out = FirstStageForward(bind, scene, params, config);
  return DecodeProposals(out.head.heatmap_logits.value(), out.head.regression.value(),
                         out.bev.value(), config.sim.grid, config.max_proposals);
}

std::vector<Detection> DetectScene(const PreparedScene& scene, const ModelParams& params,
                                   const RunConfig& config) {
  std::vector<Detection> out;
  const AssociationConfig assoc = MakeAssociation(config);
  for (const Proposal& p : ProposeScene(scene, params, config)) {
    if (config.ablation.rgpp) {
      if (!params.has_refine) throw ConfigError("model has no refinement stage for this ablation");
      const Proposal r =
          RefineProposal(p, scene.points, scene.cameras, assoc, params.refine, config.ablation.pra);
      out.push_back(Detection{r.box(), r.score});
    } else {
      out.push_back(Detection{p.box(), p.score});
    }
  }
  return out;
}

std::vector<SceneDetections> DetectScenes(std::span<const std::unique_ptr<PreparedScene>> scenes,
                                          const ModelParams& params, const RunConfig& config) {
  std::vector<SceneDetections> out(scenes.size());
  ParallelFor(static_cast<int>(scenes.size()), config.threads, [&](int i) {
    out[i].scene_id = scenes[i]->scene_id;
    out[i].detections = DetectScene(*scenes[i], params, config);
  });
  return out;
}

}  // namespace radcam
