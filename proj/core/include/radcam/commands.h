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

// The four batch commands behind the command line tool. Each is a pure
// function of its inputs and writes byte-stable artifacts.

#ifndef RADCAM_COMMANDS_H_
#define RADCAM_COMMANDS_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "radcam/config.h"
#include "radcam/eval.h"
#include "radcam/scene.h"

namespace radcam {

namespace fs = std::filesystem;

// Scene i uses seed DeriveSeed(config.seed, i). Writes scene-NNNNN.json
// files and manifest.json (config hash, per-file digests, overall hash).
// Returns the overall manifest hash.
std::string CmdGen(const RunConfig& config, int count, const fs::path& out_dir);

std::vector<SceneRecord> ReadScenes(const fs::path& dir, int threads);

// Trains on every scene in `scenes_dir`; writes the checkpoint plus
// loss.csv, loss.svg and config.txt into `out_dir`.
void CmdTrain(const RunConfig& config, const fs::path& scenes_dir, const fs::path& checkpoint,
              const fs::path& out_dir);

// Writes detections.json and run.json into `out_dir`.
void CmdInfer(const RunConfig& config, const fs::path& checkpoint, const fs::path& scenes_dir,
              const fs::path& out_dir);

// Evaluates each detection file against the scenes; writes metrics.json
// (and metrics_N.json for further sets), report.txt, per-class PR curves and
// a BEV scatter of the first scene. Returns the report text.
std::string CmdEval(std::span<const fs::path> detection_files, const fs::path& scenes_dir,
                    const fs::path& out_dir, int threads);

// Comparison table with one row per run and deltas to the previous row.
struct TableRow {
  std::string label;
  AblationFlags flags;
  bool has_flags = false;
  Metrics metrics;
};
std::string ComparisonTable(std::span<const TableRow> rows);

}  // namespace radcam

#endif  // RADCAM_COMMANDS_H_
