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

// Center-distance detection metrics: greedy matching per class, 101-point
// interpolated AP averaged over distance thresholds, TP errors and a
// composite detection score.

#ifndef RADCAM_EVAL_H_
#define RADCAM_EVAL_H_

#include <array>
#include <span>
#include <string>
#include <vector>

#include "radcam/scene.h"

namespace radcam {

struct Detection {
  Box3d box;
  double score = 0;
};

// Detections or ground truth of one scene.
struct SceneDetections {
  std::string scene_id;
  std::vector<Detection> detections;
};
struct SceneBoxes {
  std::string scene_id;
  std::vector<Box3d> boxes;
};

inline constexpr std::array<double, 4> kMatchThresholds = {0.5, 1.0, 2.0, 4.0};
inline constexpr double kTpThreshold = 2.0;
inline constexpr double kMinRecall = 0.1;
inline constexpr double kMinPrecision = 0.1;

struct MatchEntry {
  int scene = 0;
  int detection = 0;
  int gt = -1;  // -1: false positive
  double score = 0;
  double distance = 0;  // to the matched gt; 0 for false positives
};

struct MatchResult {
  double threshold = 0;
  int num_gt = 0;
  std::vector<MatchEntry> entries;  // descending score
  std::vector<double> precision;    // cumulative, one per entry
  std::vector<double> recall;
};

// Greedy matching for one class. dets[s] and gts[s] belong to scene s.
// Detections are visited by descending score (ties: scene, then center
// coordinates); each takes the nearest unmatched gt of its scene within
// `threshold` (inclusive) by planar center distance.
MatchResult Match(std::span<const std::vector<Detection>> dets,
                  std::span<const std::vector<Box3d>> gts, double threshold);

// Precision sampled at 101 evenly spaced recalls by linear interpolation
// (0 beyond the last recall), restricted to recall > kMinRecall, shifted by
// kMinPrecision and renormalized.
double AveragePrecision(const MatchResult& match);
std::array<double, 101> InterpolatedPrecision(const MatchResult& match);

struct TpErrors {
  double translation = 1;  // m
  double scale = 1;        // 1 - aligned IoU
  double orientation = 1;  // rad
  double velocity = 1;     // m/s
  int num_tp = 0;
};

// Mean errors over true positives of `match`; 1.0 each without any.
TpErrors ComputeTpErrors(const MatchResult& match, std::span<const std::vector<Detection>> dets,
                         std::span<const std::vector<Box3d>> gts);

double AlignedIou(const Vec3& a, const Vec3& b);
double YawDifference(double a, double b);

// (5 mAP + sum_i (1 - min(1, err_i))) / 9 over the four TP errors.
double DetectionScore(double map, const TpErrors& errors);

struct ClassMetrics {
  std::array<double, 4> ap{};  // per threshold
  double mean_ap = 0;
  TpErrors errors;
  int num_gt = 0;
  int num_det = 0;
};

struct Metrics {
  std::array<ClassMetrics, kNumClasses> classes;
  double map = 0;
  TpErrors errors;  // class means
  double nds = 0;
  // PR curves per class and threshold, for plotting.
  std::array<std::array<MatchResult, 4>, kNumClasses> curves;
};

// Scenes are joined by id. Throws DataError listing every id present on
// only one side.
Metrics Evaluate(std::span<const SceneBoxes> gt, std::span<const SceneDetections> dets);

}  // namespace radcam

#endif  // RADCAM_EVAL_H_
