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

// Run configuration: one key = value file holding every knob of a run.

#ifndef RADCAM_CONFIG_H_
#define RADCAM_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "radcam/scene_sim.h"

namespace radcam {

// Enabled model stages. pra feeds the set abstraction, so it needs rgpp.
struct AblationFlags {
  bool rgbq = true;
  bool rcg = true;
  bool rgpp = true;
  bool pra = true;

  bool uses_radar_bev() const { return rgbq || rcg; }
  void Validate() const;  // throws ConfigError
  // Comma list of enabled stages; "none" when all are off.
  std::string ToString() const;
  // Accepts a comma list of stage names, or "none" / "" for all off.
  static AblationFlags Parse(std::string_view list);
  bool operator==(const AblationFlags&) const = default;
};

struct RunConfig {
  SimConfig sim;  // sim.grid is also the model's BEV grid

  int max_sweeps = 7;
  double radar_max_speed = 50.0;
  double radar_min_rcs = -10.0;

  int encoder_layers = 2;
  int sampling_points = 4;
  int pillar_heights = 4;
  int ffn_width = 0;  // 0: twice the channel count

  int max_proposals = 100;
  double regression_weight = 1.0;

  int grid_per_point = 7;
  int num_grid_points = 64;
  double rho_min = 0.5;
  double rho_max = 3.0;
  int refine_hidden = 64;
  int attended_width = 64;
  int encoding_frequencies = 8;
  double spa_azimuth_deg = 5.0;
  double spa_radial = 3.0;

  AblationFlags ablation;

  std::string optimizer = "adam";  // adam | sgd
  int train_steps = 200;
  int batch_size = 0;  // scenes per step; 0: full batch
  double learning_rate = 1e-2;
  int lr_decay_step = 150;
  double lr_decay = 0.1;
  int refine_steps = 200;
  double refine_learning_rate = 1e-2;
  int refine_decay_step = 150;
  int refine_proposals = 30;        // per training scene, strongest first
  double refine_match_distance = 2.0;

  std::uint64_t seed = 0;
  int threads = 1;

  void Set(std::string_view key, std::string_view value);  // throws ConfigError
  void Validate() const;
  // Every key with its effective value, one "key = value" line each, in a
  // fixed order. run.threads is left out since it never changes results.
  std::string Dump() const;
  // Stable 64-bit hash of Dump(), as 16 hex digits.
  std::string Hash() const;
};

RunConfig ParseConfig(std::string_view text);
RunConfig LoadConfig(const std::filesystem::path& path);

// FNV-1a over bytes, as 16 hex digits.
std::string HexDigest(std::string_view bytes);

}  // namespace radcam

#endif  // RADCAM_CONFIG_H_
