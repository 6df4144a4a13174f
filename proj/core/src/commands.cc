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

#include "radcam/commands.h"

#include <cstdio>

#include <nlohmann/json.hpp>
#include "radcam/checkpoint.h"
#include "radcam/io.h"
#include "radcam/model.h"
#include "radcam/parallel.h"
#include "radcam/plots.h"
#include "radcam/random.h"
#include "radcam/scene_sim.h"
#include "radcam/train.h"

namespace radcam {

using nlohmann::json;

std::string CmdGen(const RunConfig& config, int count, const fs::path& out_dir) {
  config.Validate();
  if (count < 0) throw ConfigError("scene count must be >= 0");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create " + out_dir.string() + ": " + ec.message());
  std::vector<std::string> names(count), digests(count), ids(count);
  ParallelFor(count, config.threads, [&](int i) {
    char name[32];
    std::snprintf(name, sizeof(name), "scene-%05d", i);
    const SceneRecord scene = GenerateScene(config.sim, DeriveSeed(config.seed, i), name);
    const std::string text = SceneToJson(scene);
    WriteFile(out_dir / (std::string(name) + ".json"), text);
    names[i] = std::string(name) + ".json";
    ids[i] = scene.scene_id;
    digests[i] = HexDigest(text);
  });
  json manifest;
  manifest["config_hash"] = config.Hash();
  manifest["seed"] = config.seed;
  manifest["count"] = count;
  manifest["scenes"] = json::array();
  std::string all = config.Hash();
  for (int i = 0; i < count; ++i) {
    manifest["scenes"].push_back({{"file", names[i]}, {"scene_id", ids[i]}, {"digest", digests[i]}});
    all += digests[i];
  }
  const std::string hash = HexDigest(all);
  manifest["hash"] = hash;
  WriteFile(out_dir / "manifest.json", manifest.dump(1));
  WriteFile(out_dir / "config.txt", config.Dump());
  return hash;
}

std::vector<SceneRecord> ReadScenes(const fs::path& dir, int threads) {
  const auto files = ListSceneFiles(dir);
  std::vector<SceneRecord> out(files.size());
  ParallelFor(static_cast<int>(files.size()), threads, [&](int i) { out[i] = ReadScene(files[i]); });
  return out;
}

void CmdTrain(const RunConfig& config, const fs::path& scenes_dir, const fs::path& checkpoint,
              const fs::path& out_dir) {
  config.Validate();
  const auto records = ReadScenes(scenes_dir, config.threads);
  if (records.empty()) throw DataError("no scenes in " + scenes_dir.string());
  const auto scenes = PrepareScenes(records, config);
  std::vector<LossRecord> log;
  ModelParams params = Train(config, scenes, &log);
  SaveCheckpoint(checkpoint, params.All(), config.Hash());
  WriteFile(out_dir / "loss.csv", LossLogCsv(log));
  WriteFile(out_dir / "loss.svg", LossCurveSvg(log));
  WriteFile(out_dir / "config.txt", config.Dump());
}

void CmdInfer(const RunConfig& config, const fs::path& checkpoint, const fs::path& scenes_dir,
              const fs::path& out_dir) {
  config.Validate();
  ModelParams params = InitModel(config, config.seed);
  const std::string trained_hash = LoadCheckpoint(checkpoint, params.All());
  const auto records = ReadScenes(scenes_dir, config.threads);
  const auto scenes = PrepareScenes(records, config);
  const auto dets = DetectScenes(scenes, params, config);
  WriteFile(out_dir / "detections.json", DetectionsToJson(dets));
  json run;
  run["ablation"] = config.ablation.ToString();
  run["config_hash"] = config.Hash();
  run["checkpoint_config_hash"] = trained_hash;
  run["num_scenes"] = scenes.size();
  WriteFile(out_dir / "run.json", run.dump(1));
  WriteFile(out_dir / "config.txt", config.Dump());
}

std::string ComparisonTable(std::span<const TableRow> rows) {
  std::string out =
      "run                  | RGBQ | RCG | RGPP | PRA |   NDS  |   mAP  |  dNDS  |  dmAP  | "
      "mATE  | mASE  | mAOE  | mAVE\n";
  out += std::string(out.size() - 1, '-') + "\n";
  char buf[256];
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const TableRow& r = rows[i];
    auto mark = [&](bool on) { return !r.has_flags ? "  ? " : on ? "  x " : "    "; };
    std::string dn = "    -  ", dm = "    -  ";
    if (i > 0) {
      std::snprintf(buf, sizeof(buf), "%+7.2f", 100 * (r.metrics.nds - rows[i - 1].metrics.nds));
      dn = buf;
      std::snprintf(buf, sizeof(buf), "%+7.2f", 100 * (r.metrics.map - rows[i - 1].metrics.map));
      dm = buf;
    }
    const TpErrors& e = r.metrics.errors;
    std::snprintf(buf, sizeof(buf),
                  "%-20.20s | %s | %s| %s | %s| %6.2f | %6.2f | %s | %s | %5.3f | %5.3f | %5.3f | "
                  "%5.3f\n",
                  r.label.c_str(), mark(r.flags.rgbq), mark(r.flags.rcg), mark(r.flags.rgpp),
                  mark(r.flags.pra), 100 * r.metrics.nds, 100 * r.metrics.map, dn.c_str(),
                  dm.c_str(), e.translation, e.scale, e.orientation, e.velocity);
    out += buf;
  }
  return out;
}

std::string CmdEval(std::span<const fs::path> detection_files, const fs::path& scenes_dir,
                    const fs::path& out_dir, int threads) {
  if (detection_files.empty()) throw ConfigError("eval needs at least one detections file");
  const auto records = ReadScenes(scenes_dir, threads);
  std::vector<SceneBoxes> gt;
  for (const SceneRecord& s : records) gt.push_back(SceneBoxes{s.scene_id, s.gt});

  std::vector<TableRow> rows;
  std::vector<SceneDetections> first_dets;
  for (std::size_t k = 0; k < detection_files.size(); ++k) {
    const fs::path& file = detection_files[k];
    const auto dets = DetectionsFromJson(ReadFile(file));
    if (k == 0) first_dets = dets;
    TableRow row;
    row.label = file.parent_path().filename().string();
    if (row.label.empty()) row.label = file.stem().string();
    const fs::path run = file.parent_path() / "run.json";
    if (fs::exists(run)) {
      try {
        row.flags = AblationFlags::Parse(json::parse(ReadFile(run)).at("ablation").get<std::string>());
        row.has_flags = true;
      } catch (const json::exception& e) {
        throw DataError(run.string() + ": " + e.what());
      }
    }
    try {
      row.metrics = Evaluate(gt, dets);
    } catch (const DataError& e) {
      throw DataError(file.string() + ": " + e.what());
    }
    const std::string name = k == 0 ? "metrics.json" : "metrics_" + std::to_string(k) + ".json";
    WriteFile(out_dir / name, MetricsToJson(row.metrics));
    rows.push_back(std::move(row));
  }

  const Metrics& m = rows[0].metrics;
  std::string report;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%zu scenes, %zu detection set(s)\n\n", records.size(),
                rows.size());
  report += buf;
  report += "class        AP@0.5  AP@1.0  AP@2.0  AP@4.0    ATE    ASE    AOE    AVE\n";
  for (int c = 0; c < kNumClasses; ++c) {
    const ClassMetrics& cm = m.classes[c];
    std::snprintf(buf, sizeof(buf), "%-11s %7.3f %7.3f %7.3f %7.3f %6.3f %6.3f %6.3f %6.3f\n",
                  std::string(ClassName(static_cast<ObjectClass>(c))).c_str(), cm.ap[0], cm.ap[1],
                  cm.ap[2], cm.ap[3], cm.errors.translation, cm.errors.scale,
                  cm.errors.orientation, cm.errors.velocity);
    report += buf;
  }
  std::snprintf(buf, sizeof(buf), "\nmAP %.4f  NDS %.4f\n\n", m.map, m.nds);
  report += buf;
  report += ComparisonTable(rows);
  WriteFile(out_dir / "report.txt", report);

  for (int c = 0; c < kNumClasses; ++c) {
    const auto label = static_cast<ObjectClass>(c);
    WriteFile(out_dir / ("pr_" + std::string(ClassName(label)) + ".svg"), PrCurveSvg(m, label));
  }
  if (!records.empty()) {
    const SceneRecord& s = records.front();
    std::vector<Detection> dets;
    for (const SceneDetections& d : first_dets) {
      if (d.scene_id == s.scene_id) dets = d.detections;
    }
    BevGridSpec spec;
    double extent = 1.0;
    for (const Box3d& b : s.gt) extent = std::max({extent, std::abs(b.center.x()), std::abs(b.center.y())});
    spec.x_min = spec.y_min = -std::ceil(extent + 2);
    spec.x_max = spec.y_max = std::ceil(extent + 2);
    WriteFile(out_dir / "bev_scatter.svg", BevScatterSvg(s.gt, dets, spec, 0.3));
  }
  return report;
}

}  // namespace radcam
