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

#ifndef RADCAM_REFINEMENT_H_
#define RADCAM_REFINEMENT_H_

#include <span>
#include <string>
#include <vector>

#include "radcam/autodiff.h"
#include "radcam/camera.h"
#include "radcam/detection_head.h"
#include "radcam/mlp.h"
#include "radcam/radar.h"

namespace radcam {

struct AssociationConfig {
  double azimuth_window = 5.0 * kPi / 180.0;  // radians
  double radial_window = 3.0;                 // meters

  void Validate() const;
};

// Indices of points whose polar coordinates fall within the closed azimuth
// and range windows around `center`.
std::vector<int> SoftPolarAssociate(const Vec2& center, std::span<const RadarPoint> points,
                                    const AssociationConfig& config);

// Line-of-sight frame of a proposal: x along the ray from the ego origin
// to the center, y to its left. At the origin it is the ego frame.
struct SightFrame {
  Vec2 radial{1.0, 0.0};
  Vec2 tangential{0.0, 1.0};

  static SightFrame At(const Vec2& center);
  Vec2 ToLocal(const Vec2& v) const { return Vec2(v.dot(radial), v.dot(tangential)); }
  Vec3 ToLocal(const Vec3& v) const { return Vec3(v.head<2>().dot(radial), v.head<2>().dot(tangential), v.z()); }
  Vec2 ToEgo(const Vec2& v) const { return v.x() * radial + v.y() * tangential; }
};

// Radar point input r_k: offset from the proposal center, rcs, velocity and
// sweep age. Offset and velocity are expressed in the proposal's sight frame.
constexpr int kRadarFeatureWidth = 7;
std::vector<double> RadarPointFeature(const RadarPoint& p, const Vec3& center);

// Sinusoidal encoding of a 3D offset: sin and cos at `frequencies` octaves
// per axis, base angular frequency pi/8 rad/m.
constexpr int kDefaultEncodingFrequencies = 8;
std::vector<double> PositionalEncoding(const Vec3& offset, int frequencies);

struct RefinementParams {
  MlpParams point_mlp;      // MLP_1: 7 -> H
  MlpParams score_mlp;      // MLP_2: H + 6F -> H -> 1
  MlpParams value_mlp;      // MLP_3: 7 -> A
  std::vector<double> radii{0.8, 1.6};
  std::vector<MlpParams> set_abstraction;  // per radius: A + 3 -> C / radii
  MlpParams refine_head;    // 2C -> H -> 10, last layer zero-initialized
  int encoding_frequencies = kDefaultEncodingFrequencies;
  double rho_min = 0.5;
  double rho_max = 3.0;
  int grid_per_point = 7;   // T
  int num_grid_points = 64; // M

  void Validate() const;
  void AppendTo(ParamList& list, const std::string& prefix);
};

RefinementParams MakeRefinement(int channels, int hidden, int attended_width, Rng& rng,
                                int encoding_frequencies = kDefaultEncodingFrequencies);

struct AttentionOutput {
  Var attended;  // [K x A]
  Var weights;   // [1 x K], softmax over the proposal's points
  Var scores;    // [1 x K]
};

// s_k = MLP_2([MLP_1(r_k); enc(c - u_k)]), a_k = softmax(s)_k * MLP_3(r_k).
// With `use_attention` false the weights are uniform 1/K.
AttentionOutput ProposalRadarAttention(ParamBinder& bind, const Vec3& center,
                                       std::span<const RadarPoint> points,
                                       const RefinementParams& params, bool use_attention = true);

// Line of T points through u along v_tan with spacing gamma / (T - 1), where
// gamma = clamp(|v_tan|, rho_min, rho_max). Below 1e-9 m/s of tangential
// speed the direction is perpendicular to `yaw` and gamma = rho_min.
std::vector<Vec2> GenerateGridPoints(const Vec2& u, const Vec2& v_tan, int t, double rho_min,
                                     double rho_max, double yaw);

// Greedy max-min subset, seeded at `seed`; ties go to the lowest index.
// Returns selection order. All indices when candidates <= m.
std::vector<int> FarthestPointSampleFrom(std::span<const Vec3> candidates, int m, int seed);
// Seeded at the candidate nearest `center`.
std::vector<int> FarthestPointSample(std::span<const Vec3> candidates, int m, const Vec3& center);

// Ball membership between radar points and grid points, per radius.
struct BallPairs {
  std::vector<int> point;  // k
  std::vector<int> grid;   // m
  std::vector<double> offset;  // u_k - g_m, 3 per pair
};

// Offsets are rotated into `frame`.
std::vector<BallPairs> BallQuery(std::span<const Vec3> points, std::span<const Vec3> grid,
                                 std::span<const double> radii, const SightFrame& frame = {});

// F_m^pts: per radius, encode [a_k; u_k - g_m] for points within the ball
// (planar distance), max-pool over k, and concatenate radii. Empty balls
// give zeros. Returns [M x C].
Var SetAbstraction(ParamBinder& bind, const Var& attended, std::span<const BallPairs> pairs,
                   int num_grid, const RefinementParams& params);

// F_m^img: level-0 bilinear samples at each grid point's projection,
// averaged over valid views; zeros without any valid view. Returns [M x C].
Tensor PoolImageFeatures(std::span<const Vec3> grid, std::span<const CameraFeatures> cameras);

// Residuals (dx, dy, dz, dlog w, dlog l, dlog h, dyaw, dvx, dvy, dscore
// logit) from max_m(F_pts + F_img) concatenated with the latent. The planar
// position and velocity terms are in the proposal's sight frame.
constexpr int kResidualWidth = 10;
Var FuseAndPredict(ParamBinder& bind, const Var& point_features, const Tensor& image_features,
                   const Tensor& latent, const RefinementParams& params);

Proposal ApplyResiduals(const Proposal& proposal, std::span<const double> residual);

// Everything about one proposal that does not depend on learned weights.
struct RefinementInputs {
  Proposal proposal;
  std::vector<RadarPoint> points;  // associated, K >= 1
  std::vector<Vec3> grid;          // M selected grid points
  std::vector<BallPairs> pairs;
  Tensor image_features;           // [M x C]
};

// Runs association, grid generation and FPS. Returns false when no radar
// point is associated (the proposal then bypasses refinement).
bool PrepareRefinement(const Proposal& proposal, std::span<const RadarPoint> points,
                       std::span<const CameraFeatures> cameras, const AssociationConfig& assoc,
                       const RefinementParams& params, RefinementInputs* out);

Var RefinementForward(ParamBinder& bind, const RefinementInputs& inputs,
                      const RefinementParams& params, bool use_attention);

Proposal RefineProposal(const Proposal& proposal, std::span<const RadarPoint> points,
                        std::span<const CameraFeatures> cameras, const AssociationConfig& assoc,
                        const RefinementParams& params, bool use_attention = true);

}  // namespace radcam

#endif  // RADCAM_REFINEMENT_H_
