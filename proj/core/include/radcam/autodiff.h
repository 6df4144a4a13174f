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

// Reverse-mode automatic differentiation over whole-tensor primitives.
//
// A Tape records every primitive applied to tracked values. Node creation
// order is a topological order, so Backward() walks the node list once in
// reverse. Tapes are single-threaded; use one per worker.

#ifndef RADCAM_AUTODIFF_H_
#define RADCAM_AUTODIFF_H_

#include <deque>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "radcam/tensor.h"

namespace radcam {

class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  int id() const { return id_; }
  Tape* tape() const { return tape_; }
  bool requires_grad() const;

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(std::map<int, Tensor> by_id) : by_id_(std::move(by_id)) {}
  // Gradient of the loss w.r.t. a tracked leaf; zeros when untouched.
  const Tensor& Of(const Var& leaf) const;
  bool Has(const Var& leaf) const { return by_id_.count(leaf.id()) > 0; }

 private:
  std::map<int, Tensor> by_id_;
};

class Tape {
 public:
  using BackwardFn = std::function<void(const Tensor& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // When disabled, ops still compute values but record no backward closures.
  void set_grad_enabled(bool enabled) { grad_enabled_ = enabled; }
  bool grad_enabled() const { return grad_enabled_; }

  Var Constant(Tensor value);
  Var Leaf(Tensor value);

  // Used by primitives. `inputs` decides whether the node needs a gradient.
  Var Record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);
  Var Record(Tensor value, std::span<const Var> inputs, BackwardFn backward);

  // Gradient accumulator for a node during Backward(); nullptr when the node
  // does not participate in differentiation.
  Tensor* GradSlot(int id);

  Gradients Backward(const Var& loss);

  const Tensor& value(int id) const { return nodes_[id].value; }
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    bool requires_grad = false;
    bool is_leaf = false;
    BackwardFn backward;
  };

  std::deque<Node> nodes_;
  std::vector<Tensor> grads_;
  std::vector<bool> grad_live_;
  bool grad_enabled_ = true;
};

namespace ops {

Var MatMul(const Var& a, const Var& b);
Var Add(const Var& a, const Var& b);
Var Sub(const Var& a, const Var& b);
Var Mul(const Var& a, const Var& b);
Var Scale(const Var& a, double factor);
// x[...xC] + bias[C] broadcast over leading axes.
Var AddBias(const Var& x, const Var& bias);
// x[N x C] scaled row-wise by s[N].
Var ScaleRows(const Var& x, const Var& s);
Var Relu(const Var& x);
Var Sigmoid(const Var& x);
// Softmax over the last axis, computed with max subtraction.
Var Softmax(const Var& x);
Var Sum(const Var& x);
Var Mean(const Var& x);
Var Reshape(const Var& x, Shape shape);
// Concatenate along the last axis; inputs share their leading extent.
Var Concat(std::span<const Var> parts);
Var Concat(std::initializer_list<Var> parts);
Var SliceCols(const Var& x, int begin, int end);
Var GatherRows(const Var& x, std::span<const int> rows);
// Row-wise max per segment of x[N x C]; empty segments yield zeros. The
// subgradient goes to the lowest row index among ties.
Var SegmentMax(const Var& x, std::span<const int> segment, int num_segments);
Var SegmentSum(const Var& x, std::span<const int> segment, int num_segments);
// out[n] = sum_g w[n, g] * x[n * G + g] for x[N*G x C], w[N x G].
Var WeightedGroupSum(const Var& x, const Var& w);
// Bilinear samples of map[H x W x C] at uv[N x 2] (u = column, v = row) in
// pixel units. Out-of-range samples are zero. Differentiable in both map
// and uv.
Var BilinearGather(const Var& map, const Var& uv);
// Like BilinearGather over a set of constant maps; sample i reads
// maps[map_index[i]]. Differentiable in uv only.
Var BilinearGatherConst(std::span<const Tensor* const> maps, std::span<const int> map_index,
                        const Var& uv);
// 3x3 same-padding convolution: x[H x W x Cin], w[3 x 3 x Cin x Cout], b[Cout].
Var Conv3x3(const Var& x, const Var& w, const Var& b);
// Normalization over the last axis with learned gain and bias.
Var LayerNorm(const Var& x, const Var& gain, const Var& bias, double eps = 1e-5);

// Penalty-reduced pixel focal loss on sigmoid(logits) against a Gaussian
// heatmap, summed and divided by `normalizer`.
Var FocalLoss(const Var& logits, const Tensor& target, double normalizer, double alpha = 2.0,
              double beta = 4.0);
// sum(weight * |pred - target|) / normalizer.
Var WeightedL1(const Var& pred, const Tensor& target, const Tensor& weight, double normalizer);
// sum(weight * BCE(sigmoid(logits), target)) / normalizer.
Var SigmoidBce(const Var& logits, const Tensor& target, const Tensor& weight, double normalizer);

}  // namespace ops

// Plain (untaped) bilinear sample of map[H x W x C] at (u, v). Coordinates
// outside [0, W-1] x [0, H-1] give the zero vector and set *clipped.
std::vector<double> BilinearSample(const Tensor& map, double u, double v, bool* clipped = nullptr);

}  // namespace radcam

#endif  // RADCAM_AUTODIFF_H_
