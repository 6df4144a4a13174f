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

#include "radcam/detection_head.h"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace radcam {

void Proposal::Validate() const {
  if (!(size.x() > 0 && size.y() > 0 && size.z() > 0)) {
    throw ContractError("proposal size must be positive");
  }
  if (!(score >= 0 && score <= 1)) throw ContractError("proposal score outside [0, 1]");
  if (!(yaw > -kPi && yaw <= kPi)) throw ContractError("proposal yaw not wrapped");
  if (!center.allFinite() || !velocity.allFinite()) {
    throw ContractError("proposal has non-finite values");
  }
}

void HeadParams::AppendTo(ParamList& list, const std::string& prefix) {
  list.emplace_back(prefix + ".conv.weight", &conv_weight);
  list.emplace_back(prefix + ".conv.bias", &conv_bias);
  AppendParams(list, prefix + ".output", output);
}

HeadParams MakeHead(int channels, Rng& rng) {
  HeadParams p;
  p.conv_weight = MakeConvWeight(channels, channels, rng);
  p.conv_bias = Tensor({channels});
  p.output = MakeMlp({channels, kNumClasses + kRegressionWidth}, Activation::kNone, rng);
  for (double& w : p.output.layers[0].weight.mutable_data()) w *= 0.1;
  // Heatmap prior of ~0.1 keeps the focal loss well behaved at the start.
  for (int k = 0; k < kNumClasses; ++k) p.output.layers[0].bias[k] = -2.19;
  return p;
}

HeadOutput HeadForward(ParamBinder& bind, const Var& bev, const HeadParams& params) {
  const Shape& s = bev.shape();
  Var h = ops::Relu(ops::Conv3x3(bev, bind(params.conv_weight), bind(params.conv_bias)));
  Var out = MlpForward(bind, params.output, h);
  Var flat = ops::Reshape(out, {s[0] * s[1], kNumClasses + kRegressionWidth});
  HeadOutput o;
  o.heatmap_logits = ops::Reshape(ops::SliceCols(flat, 0, kNumClasses), {s[0], s[1], kNumClasses});
  o.regression = ops::Reshape(ops::SliceCols(flat, kNumClasses, kNumClasses + kRegressionWidth),
                              {s[0], s[1], kRegressionWidth});
  return o;
}

std::vector<double> EncodeBox(const Box3d& box, const BevGridSpec& spec, const BevCell& cell) {
  const Vec2 c = spec.CellCenter(cell.row, cell.col);
  return {box.center.x() - c.x(),   box.center.y() - c.y(),   box.center.z(),
          std::log(box.size.x()),   std::log(box.size.y()),   std::log(box.size.z()),
          std::sin(box.yaw),        std::cos(box.yaw),        box.velocity.x(),
          box.velocity.y()};
}

Box3d DecodeBox(std::span<const double> r, const BevGridSpec& spec, const BevCell& cell,
                ObjectClass label) {
  const Vec2 c = spec.CellCenter(cell.row, cell.col);
  Box3d b;
  b.center = Vec3(c.x() + r[0], c.y() + r[1], r[2]);
  // Clamp log sizes so an untrained head cannot produce overflow.
  b.size = Vec3(std::exp(std::clamp(r[3], -5.0, 5.0)), std::exp(std::clamp(r[4], -5.0, 5.0)),
                std::exp(std::clamp(r[5], -5.0, 5.0)));
  b.yaw = WrapAngle(std::atan2(r[6], r[7]));
  b.velocity = Vec2(r[8], r[9]);
  b.label = label;
  return b;
}

std::vector<Proposal> DecodeProposals(const Tensor& heatmap_logits, const Tensor& regression,
                                      const Tensor& bev, const BevGridSpec& spec, int max_n) {
  if (max_n <= 0) return {};
  const int rows = heatmap_logits.dim(0), cols = heatmap_logits.dim(1);
  const int classes = heatmap_logits.dim(2);
  const int channels = bev.dim(2);
  auto score_at = [&](int r, int c, int k) {
    return 1.0 / (1.0 + std::exp(-heatmap_logits.at(r, c, k)));
  };
  struct Peak {
    double score;
    int label;
    int flat;
  };
  std::vector<Peak> peaks;
  for (int k = 0; k < classes; ++k) {
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const double s = score_at(r, c, k);
        bool peak = true;
        for (int dr = -1; dr <= 1 && peak; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            if (!dr && !dc) continue;
            const int rr = r + dr, cc = c + dc;
            if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
            const double ns = score_at(rr, cc, k);
            const bool earlier = rr * cols + cc < r * cols + c;
            if (earlier ? ns >= s : ns > s) {
              peak = false;
              break;
            }
          }
        }
        if (peak) peaks.push_back(Peak{s, k, r * cols + c});
      }
    }
  }
  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
    return std::tie(b.score, a.label, a.flat) < std::tie(a.score, b.label, b.flat);
  });
  if (static_cast<int>(peaks.size()) > max_n) peaks.resize(max_n);
  std::vector<Proposal> out;
  out.reserve(peaks.size());
  for (const Peak& pk : peaks) {
    const BevCell cell{pk.flat / cols, pk.flat % cols};
    std::span<const double> reg(regression.data().data() +
                                    static_cast<std::size_t>(pk.flat) * kRegressionWidth,
                                kRegressionWidth);
    const Box3d box = DecodeBox(reg, spec, cell, static_cast<ObjectClass>(pk.label));
    Proposal p;
    p.center = box.center;
    p.size = box.size;
    p.yaw = box.yaw;
    p.velocity = box.velocity;
    p.score = pk.score;
    p.label = box.label;
    p.cell = cell;
    p.latent = Tensor({channels},
                      std::vector<double>(bev.data().begin() + static_cast<std::ptrdiff_t>(pk.flat) * channels,
                                          bev.data().begin() + static_cast<std::ptrdiff_t>(pk.flat + 1) * channels));
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Proposal> Propose(const BevFeatureMap& bev, const HeadParams& params, int max_n) {
  Tape tape;
  tape.set_grad_enabled(false);
  ParamBinder bind(tape);
  HeadOutput o = HeadForward(bind, tape.Constant(bev.values), params);
  return DecodeProposals(o.heatmap_logits.value(), o.regression.value(), bev.values, bev.spec,
                         max_n);
}

HeadTargets EncodeTargets(std::span<const Box3d> gt, const BevGridSpec& spec) {
  const int rows = spec.rows(), cols = spec.cols();
  HeadTargets t;
  t.heatmap = Tensor({rows, cols, kNumClasses});
  t.regression = Tensor({rows, cols, kRegressionWidth});
  t.mask = Tensor({rows, cols, kRegressionWidth});
  for (const Box3d& box : gt) {
    auto cell = BevCellOf(box.center.head<2>(), spec);
    if (!cell) {
      ++t.skipped;
      continue;
    }
    ++t.num_objects;
    const int k = static_cast<int>(box.label);
    const int radius =
        std::max(1, static_cast<int>(std::lround(0.5 * std::max(box.size.x(), box.size.y()) /
                                                 spec.resolution)));
    const double sigma = (2.0 * radius + 1.0) / 6.0;
    for (int dr = -radius; dr <= radius; ++dr) {
      for (int dc = -radius; dc <= radius; ++dc) {
        const int r = cell->row + dr, c = cell->col + dc;
        if (r < 0 || r >= rows || c < 0 || c >= cols) continue;
        const double v = std::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma));
        t.heatmap.at(r, c, k) = std::max(t.heatmap.at(r, c, k), v);
      }
    }
    const auto reg = EncodeBox(box, spec, *cell);
    for (int j = 0; j < kRegressionWidth; ++j) {
      t.regression.at(cell->row, cell->col, j) = reg[j];
      t.mask.at(cell->row, cell->col, j) = 1.0;
    }
  }
  return t;
}

HeadLossTerms HeadLoss(const HeadOutput& out, const HeadTargets& targets,
                       double regression_weight) {
  const double norm = std::max(1, targets.num_objects);
  HeadLossTerms terms;
  Var heat = ops::FocalLoss(out.heatmap_logits, targets.heatmap, norm);
  Var reg = ops::WeightedL1(out.regression, targets.regression, targets.mask, norm);
  terms.heatmap = heat.value()[0];
  terms.regression = reg.value()[0];
  terms.total = ops::Add(heat, ops::Scale(reg, regression_weight));
  return terms;
}

}  // namespace radcam
