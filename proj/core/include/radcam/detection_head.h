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

#ifndef RADCAM_DETECTION_HEAD_H_
#define RADCAM_DETECTION_HEAD_H_

#include <span>
#include <string>
#include <vector>

#include "radcam/autodiff.h"
#include "radcam/bev_encoder.h"
#include "radcam/mlp.h"
#include "radcam/scene.h"

namespace radcam {

// First-stage box with its score and the BEV feature it was decoded from.
struct Proposal {
  Vec3 center = Vec3::Zero();
  Vec3 size = Vec3::Ones();  // w, l, h
  double yaw = 0;
  Vec2 velocity = Vec2::Zero();
  double score = 0;
  ObjectClass label = ObjectClass::kCar;
  Tensor latent;  // [C]
  BevCell cell;

  // Throws ContractError unless sizes > 0, score in [0, 1], yaw in (-pi, pi].
  void Validate() const;
  Box3d box() const { return Box3d{center, size, yaw, velocity, label}; }
};

// Regression channels at each BEV cell:
// dx, dy (from the cell center, m), z, log w, log l, log h, sin, cos, vx, vy.
constexpr int kRegressionWidth = 10;

struct HeadParams {
  Tensor conv_weight, conv_bias;
  MlpParams output;  // C -> classes + regression

  void AppendTo(ParamList& list, const std::string& prefix);
};

HeadParams MakeHead(int channels, Rng& rng);

struct HeadOutput {
  Var heatmap_logits;  // [H x W x classes]
  Var regression;      // [H x W x 10]
};

HeadOutput HeadForward(ParamBinder& bind, const Var& bev, const HeadParams& params);

// Per-class 3x3 local maxima, strongest first, at most max_n. Plateaus yield
// one peak: a cell must beat earlier neighbors strictly and later ones weakly.
std::vector<Proposal> DecodeProposals(const Tensor& heatmap_logits, const Tensor& regression,
                                      const Tensor& bev, const BevGridSpec& spec, int max_n);

std::vector<Proposal> Propose(const BevFeatureMap& bev, const HeadParams& params, int max_n);

struct HeadTargets {
  Tensor heatmap;     // [H x W x classes], Gaussian splats, 1 at centers
  Tensor regression;  // [H x W x 10]
  Tensor mask;        // [H x W x 10], 1 at center cells
  int num_objects = 0;
  int skipped = 0;    // boxes outside the grid
};

HeadTargets EncodeTargets(std::span<const Box3d> gt, const BevGridSpec& spec);

// Regression vector for a box whose center falls in `cell`.
std::vector<double> EncodeBox(const Box3d& box, const BevGridSpec& spec, const BevCell& cell);
Box3d DecodeBox(std::span<const double> regression, const BevGridSpec& spec, const BevCell& cell,
                ObjectClass label);

struct HeadLossTerms {
  Var total;
  double heatmap = 0;
  double regression = 0;
};

HeadLossTerms HeadLoss(const HeadOutput& out, const HeadTargets& targets,
                       double regression_weight = 1.0);

}  // namespace radcam

#endif  // RADCAM_DETECTION_HEAD_H_
