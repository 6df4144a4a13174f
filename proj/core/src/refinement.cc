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

#include "radcam/refinement.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace radcam {

void AssociationConfig::Validate() const {
  if (!(azimuth_window > 0) || !(radial_window > 0)) {
    throw ConfigError("association windows must be positive");
  }
}

std::vector<int> SoftPolarAssociate(const Vec2& center, std::span<const RadarPoint> points,
                                    const AssociationConfig& config) {
  const PolarCoord c = ToPolar(center);
  std::vector<int> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const PolarCoord p = ToPolar(points[i].position.head<2>());
    if (std::abs(WrapAngle(p.azimuth - c.azimuth)) <= config.azimuth_window &&
        std::abs(p.range - c.range) <= config.radial_window) {
      out.push_back(static_cast<int>(i));
    }
  }
  return out;
}

SightFrame SightFrame::At(const Vec2& center) {
  SightFrame f;
  const double r = center.norm();
  if (r < 1e-6) return f;
  f.radial = center / r;
  f.tangential = Vec2(-f.radial.y(), f.radial.x());
  return f;
}

std::vector<double> RadarPointFeature(const RadarPoint& p, const Vec3& center) {
  const SightFrame frame = SightFrame::At(center.head<2>());
  const Vec3 d = frame.ToLocal(Vec3(p.position - center));
  const Vec2 v = frame.ToLocal(p.velocity);
  return {d.x(), d.y(), d.z(), p.rcs / 10.0, v.x() / 10.0, v.y() / 10.0, p.sweep_age / 0.5};
}

std::vector<double> PositionalEncoding(const Vec3& offset, int frequencies) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(6) * frequencies);
  for (int axis = 0; axis < 3; ++axis) {
    for (int f = 0; f < frequencies; ++f) {
      const double w = (kPi / 8.0) * std::ldexp(1.0, f);
      out.push_back(std::sin(w * offset[axis]));
      out.push_back(std::cos(w * offset[axis]));
    }
  }
  return out;
}

void RefinementParams::Validate() const {
  if (!(rho_min < rho_max)) throw ConfigError("rho_min must be below rho_max");
  if (grid_per_point < 2) throw ConfigError("grid points per radar point must be >= 2");
  if (num_grid_points < 1) throw ConfigError("selected grid point count must be >= 1");
  if (radii.empty() || radii.size() != set_abstraction.size()) {
    throw ConfigError("set abstraction needs one mlp per radius");
  }
}

void RefinementParams::AppendTo(ParamList& list, const std::string& prefix) {
  AppendParams(list, prefix + ".mlp1", point_mlp);
  AppendParams(list, prefix + ".mlp2", score_mlp);
  AppendParams(list, prefix + ".mlp3", value_mlp);
  for (std::size_t i = 0; i < set_abstraction.size(); ++i) {
    AppendParams(list, prefix + ".setabs" + std::to_string(i), set_abstraction[i]);
  }
  AppendParams(list, prefix + ".head", refine_head);
}

RefinementParams MakeRefinement(int channels, int hidden, int attended_width, Rng& rng,
                                int encoding_frequencies) {
  RefinementParams p;
  p.encoding_frequencies = encoding_frequencies;
  const int radii = static_cast<int>(p.radii.size());
  if (channels % radii != 0) {
    throw ConfigError("channel count must split evenly across set abstraction radii");
  }
  p.point_mlp = MakeMlp({kRadarFeatureWidth, hidden}, Activation::kRelu, rng);
  p.score_mlp = MakeMlp({hidden + 6 * p.encoding_frequencies, hidden, 1}, Activation::kNone, rng);
  p.value_mlp = MakeMlp({kRadarFeatureWidth, attended_width}, Activation::kRelu, rng);
  for (int i = 0; i < radii; ++i) {
    p.set_abstraction.push_back(
        MakeMlp({attended_width + 3, channels / radii}, Activation::kRelu, rng));
  }
  p.refine_head = MakeMlp({2 * channels, hidden, kResidualWidth}, Activation::kNone, rng,
                          Init::kZero);
  return p;
}

AttentionOutput ProposalRadarAttention(ParamBinder& bind, const Vec3& center,
                                       std::span<const RadarPoint> points,
                                       const RefinementParams& params, bool use_attention) {
  const int k = static_cast<int>(points.size());
  if (k == 0) throw ContractError("radar attention needs at least one associated point");
  Tape& tape = bind.tape();
  const int enc_width = 6 * params.encoding_frequencies;
  const SightFrame frame = SightFrame::At(center.head<2>());
  Tensor raw({k, kRadarFeatureWidth});
  Tensor enc({k, enc_width});
  for (int i = 0; i < k; ++i) {
    const auto f = RadarPointFeature(points[i], center);
    std::copy(f.begin(), f.end(), raw.mutable_data().begin() + i * kRadarFeatureWidth);
    const auto e = PositionalEncoding(frame.ToLocal(Vec3(center - points[i].position)),
                                      params.encoding_frequencies);
    std::copy(e.begin(), e.end(), enc.mutable_data().begin() + i * enc_width);
  }
  Var r = tape.Constant(std::move(raw));
  AttentionOutput out;
  Var values = MlpForward(bind, params.value_mlp, r);
  if (use_attention) {
    Var h = MlpForward(bind, params.point_mlp, r);
    Var s = MlpForward(bind, params.score_mlp, ops::Concat({h, tape.Constant(std::move(enc))}));
    out.scores = ops::Reshape(s, {1, k});
    out.weights = ops::Softmax(out.scores);
  } else {
    out.scores = tape.Constant(Tensor({1, k}));
    out.weights = tape.Constant(Tensor::Full({1, k}, 1.0 / k));
  }
  out.attended = ops::ScaleRows(values, ops::Reshape(out.weights, {k}));
  return out;
}

std::vector<Vec2> GenerateGridPoints(const Vec2& u, const Vec2& v_tan, int t, double rho_min,
                                     double rho_max, double yaw) {
  if (t < 2) throw ConfigError("grid generation needs T >= 2");
  const double speed = v_tan.norm();
  Vec2 dir;
  double gamma;
  if (speed < 1e-9) {
    dir = Vec2(-std::sin(yaw), std::cos(yaw));
    gamma = rho_min;
  } else {
    dir = v_tan / speed;
    gamma = std::clamp(speed, rho_min, rho_max);
  }
  std::vector<Vec2> out;
  out.reserve(t);
  for (int i = 0; i < t; ++i) {
    const double a = gamma * (static_cast<double>(i) / (t - 1) - 0.5);
    out.push_back(a * dir + u);
  }
  return out;
}

std::vector<int> FarthestPointSampleFrom(std::span<const Vec3> candidates, int m, int seed) {
  const int n = static_cast<int>(candidates.size());
  if (n == 0) throw ContractError("farthest point sampling of an empty set");
  std::vector<int> out;
  if (n <= m) {
    for (int i = 0; i < n; ++i) out.push_back(i);
    return out;
  }
  if (m <= 0) return out;
  std::vector<double> min_d(n, std::numeric_limits<double>::infinity());
  std::vector<bool> taken(n, false);
  int next = seed;
  for (int step = 0; step < m; ++step) {
    out.push_back(next);
    taken[next] = true;
    const Vec3& p = candidates[next];
    int best = -1;
    double best_d = -1.0;
    for (int i = 0; i < n; ++i) {
      if (taken[i]) continue;
      min_d[i] = std::min(min_d[i], (candidates[i] - p).squaredNorm());
      if (min_d[i] > best_d) {
        best_d = min_d[i];
        best = i;
      }
    }
    next = best;
  }
  return out;
}

std::vector<int> FarthestPointSample(std::span<const Vec3> candidates, int m, const Vec3& center) {
  if (candidates.empty()) throw ContractError("farthest point sampling of an empty set");
  int seed = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double d = (candidates[i] - center).squaredNorm();
    if (d < best) {
      best = d;
      seed = static_cast<int>(i);
    }
  }
  return FarthestPointSampleFrom(candidates, m, seed);
}

std::vector<BallPairs> BallQuery(std::span<const Vec3> points, std::span<const Vec3> grid,
                                 std::span<const double> radii, const SightFrame& frame) {
  std::vector<BallPairs> out(radii.size());
  for (std::size_t j = 0; j < radii.size(); ++j) {
    const double r2 = radii[j] * radii[j];
    for (std::size_t m = 0; m < grid.size(); ++m) {
      for (std::size_t k = 0; k < points.size(); ++k) {
        const Vec3 d = frame.ToLocal(Vec3(points[k] - grid[m]));
        if (d.head<2>().squaredNorm() > r2) continue;
        out[j].point.push_back(static_cast<int>(k));
        out[j].grid.push_back(static_cast<int>(m));
        out[j].offset.insert(out[j].offset.end(), {d.x(), d.y(), d.z()});
      }
    }
  }
  return out;
}

Var SetAbstraction(ParamBinder& bind, const Var& attended, std::span<const BallPairs> pairs,
                   int num_grid, const RefinementParams& params) {
  if (pairs.size() != params.set_abstraction.size()) {
    throw ShapeError("set abstraction got pairs for " + std::to_string(pairs.size()) +
                     " radii, has " + std::to_string(params.set_abstraction.size()) + " mlps");
  }
  Tape& tape = bind.tape();
  std::vector<Var> parts;
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    const MlpParams& mlp = params.set_abstraction[j];
    const BallPairs& bp = pairs[j];
    if (bp.point.empty()) {
      parts.push_back(tape.Constant(Tensor({num_grid, mlp.out_width()})));
      continue;
    }
    const int n = static_cast<int>(bp.point.size());
    Var feats = ops::Concat({ops::GatherRows(attended, bp.point),
                             tape.Constant(Tensor({n, 3}, bp.offset))});
    parts.push_back(ops::SegmentMax(MlpForward(bind, mlp, feats), bp.grid, num_grid));
  }
  return parts.size() == 1 ? parts[0] : ops::Concat(parts);
}

Tensor PoolImageFeatures(std::span<const Vec3> grid, std::span<const CameraFeatures> cameras) {
  if (cameras.empty()) throw DataError("image pooling needs at least one camera");
  const int channels = cameras[0].channels();
  const int m = static_cast<int>(grid.size());
  Tensor out({m, channels});
  std::vector<CameraModel> models;
  for (const CameraFeatures& c : cameras) models.push_back(c.model);
  for (int i = 0; i < m; ++i) {
    const auto hits = ProjectToCameras(grid[i], models, 0);
    int views = 0;
    std::vector<double> acc(channels, 0.0);
    for (const CameraHit& hit : hits) {
      if (!hit.valid) continue;
      bool clipped = false;
      const auto v = BilinearSample(cameras[hit.camera].levels[0], hit.uv.x(), hit.uv.y(), &clipped);
      if (clipped) continue;
      for (int c = 0; c < channels; ++c) acc[c] += v[c];
      ++views;
    }
    if (views == 0) continue;
    for (int c = 0; c < channels; ++c) out.at(i, c) = acc[c] / views;
  }
  return out;
}

Var FuseAndPredict(ParamBinder& bind, const Var& point_features, const Tensor& image_features,
                   const Tensor& latent, const RefinementParams& params) {
  Tape& tape = bind.tape();
  if (point_features.shape() != image_features.shape()) {
    throw ShapeError("point features " + ShapeString(point_features.shape()) +
                     " and image features " + ShapeString(image_features.shape()) + " differ");
  }
  const int m = point_features.shape()[0];
  const int c = point_features.shape()[1];
  Var fused = ops::Add(point_features, tape.Constant(image_features));
  Var pooled = ops::SegmentMax(fused, std::vector<int>(m, 0), 1);
  Var joint = ops::Concat({pooled, tape.Constant(latent.Reshaped({1, c}))});
  return MlpForward(bind, params.refine_head, joint);
}

Proposal ApplyResiduals(const Proposal& proposal, std::span<const double> r) {
  if (r.size() != kResidualWidth) throw ShapeError("refinement residual width");
  Proposal p = proposal;
  const SightFrame frame = SightFrame::At(proposal.center.head<2>());
  p.center.head<2>() += frame.ToEgo(Vec2(r[0], r[1]));
  p.center.z() += r[2];
  for (int i = 0; i < 3; ++i) p.size[i] *= std::exp(std::clamp(r[3 + i], -5.0, 5.0));
  p.yaw = WrapAngle(p.yaw + r[6]);
  p.velocity += frame.ToEgo(Vec2(r[7], r[8]));
  if (r[9] != 0.0) {
    const double s = std::clamp(p.score, 1e-12, 1.0 - 1e-12);
    const double logit = std::log(s / (1.0 - s)) + r[9];
    p.score = 1.0 / (1.0 + std::exp(-logit));
  }
  return p;
}

bool PrepareRefinement(const Proposal& proposal, std::span<const RadarPoint> points,
                       std::span<const CameraFeatures> cameras, const AssociationConfig& assoc,
                       const RefinementParams& params, RefinementInputs* out) {
  params.Validate();
  const std::vector<int> idx = SoftPolarAssociate(proposal.center.head<2>(), points, assoc);
  if (idx.empty()) return false;
  out->proposal = proposal;
  out->points.clear();
  for (int i : idx) out->points.push_back(points[i]);

  Vec2 v_tan = Vec2::Zero();
  if (proposal.center.head<2>().norm() >= 1e-6) {
    v_tan = DecomposeVelocity(proposal.velocity, proposal.center.head<2>()).tangential;
  }
  std::vector<Vec3> candidates;
  for (const RadarPoint& p : out->points) {
    for (const Vec2& g : GenerateGridPoints(p.position.head<2>(), v_tan, params.grid_per_point,
                                            params.rho_min, params.rho_max, proposal.yaw)) {
      candidates.emplace_back(g.x(), g.y(), proposal.center.z());
    }
  }
  out->grid.clear();
  for (int i : FarthestPointSample(candidates, params.num_grid_points, proposal.center)) {
    out->grid.push_back(candidates[i]);
  }
  std::vector<Vec3> positions;
  for (const RadarPoint& p : out->points) positions.push_back(p.position);
  out->pairs = BallQuery(positions, out->grid, params.radii,
                         SightFrame::At(proposal.center.head<2>()));
  out->image_features = PoolImageFeatures(out->grid, cameras);
  return true;
}

Var RefinementForward(ParamBinder& bind, const RefinementInputs& inputs,
                      const RefinementParams& params, bool use_attention) {
  AttentionOutput att = ProposalRadarAttention(bind, inputs.proposal.center, inputs.points, params,
                                               use_attention);
  Var pts = SetAbstraction(bind, att.attended, inputs.pairs,
                           static_cast<int>(inputs.grid.size()), params);
  return FuseAndPredict(bind, pts, inputs.image_features, inputs.proposal.latent, params);
}

Proposal RefineProposal(const Proposal& proposal, std::span<const RadarPoint> points,
                        std::span<const CameraFeatures> cameras, const AssociationConfig& assoc,
                        const RefinementParams& params, bool use_attention) {
  RefinementInputs inputs;
  if (!PrepareRefinement(proposal, points, cameras, assoc, params, &inputs)) return proposal;
  Tape tape;
  tape.set_grad_enabled(false);
  ParamBinder bind(tape);
  const Tensor r = RefinementForward(bind, inputs, params, use_attention).value();
  return ApplyResiduals(proposal, r.data());
}

}  // namespace radcam
