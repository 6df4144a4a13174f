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

#include "radcam/eval.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>

namespace radcam {

MatchResult Match(std::span<const std::vector<Detection>> dets,
                  std::span<const std::vector<Box3d>> gts, double threshold) {
  if (dets.size() != gts.size()) throw ContractError("match needs one gt list per scene");
  MatchResult result;
  result.threshold = threshold;
  for (const auto& g : gts) result.num_gt += static_cast<int>(g.size());

  for (std::size_t s = 0; s < dets.size(); ++s) {
    for (std::size_t d = 0; d < dets[s].size(); ++d) {
      result.entries.push_back(
          MatchEntry{static_cast<int>(s), static_cast<int>(d), -1, dets[s][d].score, 0.0});
    }
  }
  auto key = [&](const MatchEntry& e) {
    const Box3d& b = dets[e.scene][e.detection].box;
    return std::make_tuple(-e.score, e.scene, b.center.x(), b.center.y(), b.center.z(), e.detection);
  };
  std::sort(result.entries.begin(), result.entries.end(),
            [&](const MatchEntry& a, const MatchEntry& b) { return key(a) < key(b); });

  std::vector<std::vector<bool>> taken(gts.size());
  for (std::size_t s = 0; s < gts.size(); ++s) taken[s].assign(gts[s].size(), false);

  int tp = 0;
  int fp = 0;
  for (MatchEntry& e : result.entries) {
    const Vec2 c = dets[e.scene][e.detection].box.center.head<2>();
    double best = std::numeric_limits<double>::infinity();
    int best_gt = -1;
    for (std::size_t g = 0; g < gts[e.scene].size(); ++g) {
      if (taken[e.scene][g]) continue;
      const double d = (gts[e.scene][g].center.head<2>() - c).norm();
      if (d < best) {
        best = d;
        best_gt = static_cast<int>(g);
      }
    }
    if (best_gt >= 0 && best <= threshold) {
      taken[e.scene][best_gt] = true;
      e.gt = best_gt;
      e.distance = best;
      ++tp;
    } else {
      ++fp;
    }
    result.precision.push_back(static_cast<double>(tp) / (tp + fp));
    result.recall.push_back(result.num_gt > 0 ? static_cast<double>(tp) / result.num_gt : 0.0);
  }
  return result;
}

std::array<double, 101> InterpolatedPrecision(const MatchResult& match) {
  std::array<double, 101> out{};
  const auto& xp = match.recall;
  const auto& fp = match.precision;
  const std::size_t n = xp.size();
  if (n == 0 || match.num_gt == 0) return out;
  for (int i = 0; i <= 100; ++i) {
    // Same sample points as numpy.linspace(0, 1, 101).
    const double x = i == 100 ? 1.0 : i * 0.01;
    if (x < xp.front()) {
      out[i] = fp.front();
    } else if (x > xp.back()) {
      out[i] = 0.0;
    } else {
      // Last j with xp[j] <= x.
      const std::size_t j = std::upper_bound(xp.begin(), xp.end(), x) - xp.begin() - 1;
      if (j + 1 >= n) {
        out[i] = fp[n - 1];
      } else {
        const double t = (x - xp[j]) / (xp[j + 1] - xp[j]);
        out[i] = fp[j] + t * (fp[j + 1] - fp[j]);
      }
    }
  }
  return out;
}

double AveragePrecision(const MatchResult& match) {
  const auto prec = InterpolatedPrecision(match);
  const int first = static_cast<int>(std::lround(100 * kMinRecall)) + 1;
  double sum = 0;
  for (int i = first; i <= 100; ++i) {
    sum += std::max(0.0, prec[i] - kMinPrecision) / (1.0 - kMinPrecision);
  }
  return sum / (101 - first);
}

double AlignedIou(const Vec3& a, const Vec3& b) {
  const Vec3 inter = a.cwiseMin(b);
  const double vi = inter.prod();
  const double vu = a.prod() + b.prod() - vi;
  return vu > 0 ? vi / vu : 0.0;
}

double YawDifference(double a, double b) { return std::abs(WrapAngle(a - b)); }

TpErrors ComputeTpErrors(const MatchResult& match, std::span<const std::vector<Detection>> dets,
                         std::span<const std::vector<Box3d>> gts) {
  TpErrors sum{0, 0, 0, 0, 0};
  for (const MatchEntry& e : match.entries) {
    if (e.gt < 0) continue;
    const Box3d& d = dets[e.scene][e.detection].box;
    const Box3d& g = gts[e.scene][e.gt];
    sum.translation += (d.center.head<2>() - g.center.head<2>()).norm();
    sum.scale += 1.0 - AlignedIou(d.size, g.size);
    sum.orientation += YawDifference(d.yaw, g.yaw);
    sum.velocity += (d.velocity - g.velocity).norm();
    ++sum.num_tp;
  }
  if (sum.num_tp == 0) return TpErrors{};
  const double n = sum.num_tp;
  return TpErrors{sum.translation / n, sum.scale / n, sum.orientation / n, sum.velocity / n,
                  sum.num_tp};
}

double DetectionScore(double map, const TpErrors& e) {
  double s = 5.0 * map;
  for (double err : {e.translation, e.scale, e.orientation, e.velocity}) {
    s += 1.0 - std::min(1.0, err);
  }
  return s / 9.0;
}

Metrics Evaluate(std::span<const SceneBoxes> gt, std::span<const SceneDetections> dets) {
  std::map<std::string, const SceneBoxes*> gt_by_id;
  std::map<std::string, const SceneDetections*> det_by_id;
  for (const auto& s : gt) {
    if (!gt_by_id.emplace(s.scene_id, &s).second) throw DataError("duplicate gt scene " + s.scene_id);
  }
  for (const auto& s : dets) {
    if (!det_by_id.emplace(s.scene_id, &s).second) {
      throw DataError("duplicate detection scene " + s.scene_id);
    }
  }
  std::string missing;
  for (const auto& [id, unused] : gt_by_id) {
    if (!det_by_id.count(id)) missing += " " + id + "(no detections)";
  }
  for (const auto& [id, unused] : det_by_id) {
    if (!gt_by_id.count(id)) missing += " " + id + "(no ground truth)";
  }
  if (!missing.empty()) throw DataError("scene id mismatch:" + missing);

  Metrics m;
  TpErrors total{0, 0, 0, 0, 0};
  for (int c = 0; c < kNumClasses; ++c) {
    const auto label = static_cast<ObjectClass>(c);
    std::vector<std::vector<Detection>> d;
    std::vector<std::vector<Box3d>> g;
    for (const auto& [id, boxes] : gt_by_id) {
      g.emplace_back();
      for (const Box3d& b : boxes->boxes) {
        if (b.label == label) g.back().push_back(b);
      }
      d.emplace_back();
      for (const Detection& det : det_by_id.at(id)->detections) {
        if (det.box.label == label) d.back().push_back(det);
      }
    }
    ClassMetrics& cm = m.classes[c];
    for (const auto& v : g) cm.num_gt += static_cast<int>(v.size());
    for (const auto& v : d) cm.num_det += static_cast<int>(v.size());
    for (std::size_t t = 0; t < kMatchThresholds.size(); ++t) {
      m.curves[c][t] = Match(d, g, kMatchThresholds[t]);
      cm.ap[t] = AveragePrecision(m.curves[c][t]);
    }
    cm.mean_ap = std::accumulate(cm.ap.begin(), cm.ap.end(), 0.0) / cm.ap.size();
    cm.errors = ComputeTpErrors(Match(d, g, kTpThreshold), d, g);
    m.map += cm.mean_ap;
    total.translation += cm.errors.translation / kNumClasses;
    total.scale += cm.errors.scale / kNumClasses;
    total.orientation += cm.errors.orientation / kNumClasses;
    total.velocity += cm.errors.velocity / kNumClasses;
    total.num_tp += cm.errors.num_tp;
  }
  m.map /= kNumClasses;
  m.errors = total;
  m.nds = DetectionScore(m.map, m.errors);
  return m;
}

}  // namespace radcam
