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

#include "radcam/config.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <functional>
#include <sstream>
#include <variant>
#include <vector>

#include "radcam/io.h"

namespace radcam {
namespace {

using FieldRef = std::variant<double*, int*, bool*, std::string*, std::uint64_t*>;

std::vector<std::pair<std::string, FieldRef>> Fields(RunConfig& c) {
  SimConfig& s = c.sim;
  BevGridSpec& g = s.grid;
  std::vector<std::pair<std::string, FieldRef>> f = {
      {"grid.x_min", &g.x_min},
      {"grid.x_max", &g.x_max},
      {"grid.y_min", &g.y_min},
      {"grid.y_max", &g.y_max},
      {"grid.resolution", &g.resolution},
      {"grid.channels", &g.channels},
      {"sim.margin", &s.margin},
      {"sim.min_ego_distance", &s.min_ego_distance},
      {"sim.min_objects", &s.min_objects},
      {"sim.max_objects", &s.max_objects},
      {"sim.min_returns", &s.min_returns},
      {"sim.max_returns", &s.max_returns},
      {"sim.min_clutter", &s.min_clutter},
      {"sim.max_clutter", &s.max_clutter},
      {"sim.radial_noise", &s.radial_noise},
      {"sim.tangential_ratio", &s.tangential_ratio},
      {"sim.doppler_noise", &s.doppler_noise},
      {"sim.num_sweeps", &s.num_sweeps},
      {"sim.sweep_period", &s.sweep_period},
      {"sim.max_ego_speed", &s.max_ego_speed},
      {"sim.num_cameras", &s.num_cameras},
      {"sim.image_width", &s.image_width},
      {"sim.image_height", &s.image_height},
      {"sim.camera_hfov", &s.camera_hfov},
      {"sim.camera_height", &s.camera_height},
      {"sim.feature_levels", &s.feature_levels},
      {"sim.feature_stride", &s.feature_stride},
      {"sim.feature_noise", &s.feature_noise},
      {"radar.max_sweeps", &c.max_sweeps},
      {"radar.max_speed", &c.radar_max_speed},
      {"radar.min_rcs", &c.radar_min_rcs},
      {"encoder.layers", &c.encoder_layers},
      {"encoder.sampling_points", &c.sampling_points},
      {"encoder.pillar_heights", &c.pillar_heights},
      {"encoder.ffn_width", &c.ffn_width},
      {"head.max_proposals", &c.max_proposals},
      {"head.regression_weight", &c.regression_weight},
      {"refine.grid_per_point", &c.grid_per_point},
      {"refine.num_grid_points", &c.num_grid_points},
      {"refine.rho_min", &c.rho_min},
      {"refine.rho_max", &c.rho_max},
      {"refine.hidden", &c.refine_hidden},
      {"refine.attended_width", &c.attended_width},
      {"refine.encoding_frequencies", &c.encoding_frequencies},
      {"refine.spa_azimuth_deg", &c.spa_azimuth_deg},
      {"refine.spa_radial", &c.spa_radial},
      {"ablate.rgbq", &c.ablation.rgbq},
      {"ablate.rcg", &c.ablation.rcg},
      {"ablate.rgpp", &c.ablation.rgpp},
      {"ablate.pra", &c.ablation.pra},
      {"train.optimizer", &c.optimizer},
      {"train.steps", &c.train_steps},
      {"train.batch_size", &c.batch_size},
      {"train.learning_rate", &c.learning_rate},
      {"train.lr_decay_step", &c.lr_decay_step},
      {"train.lr_decay", &c.lr_decay},
      {"train.refine_steps", &c.refine_steps},
      {"train.refine_learning_rate", &c.refine_learning_rate},
      {"train.refine_decay_step", &c.refine_decay_step},
      {"train.refine_proposals", &c.refine_proposals},
      {"train.refine_match_distance", &c.refine_match_distance},
      {"run.seed", &c.seed},
      {"run.threads", &c.threads},
  };
  std::sort(f.begin(), f.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return f;
}

std::string_view Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T ParseNumber(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("bad value '" + std::string(value) + "' for " + std::string(key));
  }
  return out;
}

bool ParseBool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ConfigError("bad boolean '" + std::string(v) + "' for " + std::string(key));
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

void AblationFlags::Validate() const {
  if (pra && !rgpp) throw ConfigError("ablation: pra requires rgpp");
}

std::string AblationFlags::ToString() const {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ",";
    out += name;
  };
  add(rgbq, "rgbq");
  add(rcg, "rcg");
  add(rgpp, "rgpp");
  add(pra, "pra");
  return out.empty() ? "none" : out;
}

AblationFlags AblationFlags::Parse(std::string_view list) {
  AblationFlags f{false, false, false, false};
  list = Trim(list);
  if (list.empty() || list == "none") return f;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const std::size_t end = std::min(list.find(',', pos), list.size());
    const std::string_view name = Trim(list.substr(pos, end - pos));
    if (name == "rgbq") {
      f.rgbq = true;
    } else if (name == "rcg") {
      f.rcg = true;
    } else if (name == "rgpp") {
      f.rgpp = true;
    } else if (name == "pra") {
      f.pra = true;
    } else {
      throw ConfigError("unknown ablation stage '" + std::string(name) +
                        "' (expected rgbq, rcg, rgpp, pra)");
    }
    pos = end + 1;
  }
  return f;
}

void RunConfig::Set(std::string_view key, std::string_view value) {
  for (auto& [name, ref] : Fields(*this)) {
    if (name != key) continue;
    std::visit(
        [&](auto* p) {
          using T = std::remove_pointer_t<decltype(p)>;
          if constexpr (std::is_same_v<T, bool>) {
            *p = ParseBool(key, value);
          } else if constexpr (std::is_same_v<T, std::string>) {
            *p = std::string(value);
          } else {
            *p = ParseNumber<T>(key, value);
          }
        },
        ref);
    return;
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

void RunConfig::Validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("invalid config: " + what);
  };
  sim.Validate();
  ablation.Validate();
  require(max_sweeps >= 1, "radar.max_sweeps must be >= 1");
  require(sim.num_sweeps <= max_sweeps, "sim.num_sweeps exceeds radar.max_sweeps");
  require(encoder_layers >= 1, "encoder.layers must be >= 1");
  require(sampling_points >= 1, "encoder.sampling_points must be >= 1");
  require(pillar_heights >= 1, "encoder.pillar_heights must be >= 1");
  require(ffn_width >= 0, "encoder.ffn_width must be >= 0");
  require(max_proposals >= 0, "head.max_proposals must be >= 0");
  require(grid_per_point >= 2, "refine.grid_per_point must be >= 2");
  require(num_grid_points >= 1, "refine.num_grid_points must be >= 1");
  require(rho_min > 0 && rho_min < rho_max, "need 0 < refine.rho_min < refine.rho_max");
  require(refine_hidden >= 1 && attended_width >= 1, "refinement widths must be >= 1");
  require(encoding_frequencies >= 1, "refine.encoding_frequencies must be >= 1");
  require(sim.grid.channels % 2 == 0, "grid.channels must be even");
  require(spa_azimuth_deg > 0 && spa_radial > 0, "association windows must be positive");
  require(optimizer == "adam" || optimizer == "sgd", "train.optimizer must be adam or sgd");
  require(batch_size >= 0, "train.batch_size must be >= 0");
  require(train_steps >= 0 && refine_steps >= 0, "step counts must be >= 0");
  require(learning_rate > 0 && refine_learning_rate > 0, "learning rates must be positive");
  require(refine_proposals >= 1, "train.refine_proposals must be >= 1");
  require(threads >= 1, "run.threads must be >= 1");
}

std::string RunConfig::Dump() const {
  std::string out;
  for (auto& [name, ref] : Fields(const_cast<RunConfig&>(*this))) {
    if (name == "run.threads") continue;
    out += name + " = ";
    std::visit(
        [&](auto* p) {
          using T = std::remove_pointer_t<decltype(p)>;
          if constexpr (std::is_same_v<T, bool>) {
            out += *p ? "true" : "false";
          } else if constexpr (std::is_same_v<T, std::string>) {
            out += *p;
          } else if constexpr (std::is_same_v<T, double>) {
            out += FormatDouble(*p);
          } else {
            out += std::to_string(*p);
          }
        },
        ref);
    out += "\n";
  }
  return out;
}

std::string RunConfig::Hash() const { return HexDigest(Dump()); }

RunConfig ParseConfig(std::string_view text) {
  RunConfig c;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    c.Set(Trim(line.substr(0, eq)), Trim(line.substr(eq + 1)));
  }
  return c;
}

RunConfig LoadConfig(const std::filesystem::path& path) {
  std::string text;
  try {
    text = ReadFile(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  try {
    return ParseConfig(text);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string HexDigest(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace radcam
