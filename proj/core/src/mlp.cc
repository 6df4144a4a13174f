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

#include "radcam/mlp.h"

#include <cmath>

namespace radcam {

int MlpParams::in_width() const {
  if (layers.empty()) throw ShapeError("empty mlp");
  return layers.front().in_width();
}

int MlpParams::out_width() const {
  if (layers.empty()) throw ShapeError("empty mlp");
  return layers.back().out_width();
}

void MlpParams::Validate() const {
  if (layers.empty()) throw ShapeError("empty mlp");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const DenseLayer& l = layers[i];
    if (l.weight.rank() != 2 || l.bias.rank() != 1 || l.bias.dim(0) != l.out_width()) {
      throw ShapeError("mlp layer " + std::to_string(i) + " has inconsistent weight/bias");
    }
    if (i + 1 < layers.size() && l.out_width() != layers[i + 1].in_width()) {
      throw ShapeError("mlp layer " + std::to_string(i) + " output " +
                       std::to_string(l.out_width()) + " does not feed input " +
                       std::to_string(layers[i + 1].in_width()));
    }
  }
}

MlpParams MakeMlp(std::span<const int> widths, Activation last_activation, Rng& rng,
                  Init last_init) {
  if (widths.size() < 2) throw ShapeError("mlp needs at least input and output widths");
  MlpParams p;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    const int in = widths[i], out = widths[i + 1];
    const bool last = i + 2 == widths.size();
    DenseLayer layer{Tensor({in, out}), Tensor({out}),
                     last ? last_activation : Activation::kRelu};
    const Init init = last ? last_init : Init::kHe;
    if (init == Init::kHe) {
      const double stddev = std::sqrt(2.0 / in);
      for (double& w : layer.weight.mutable_data()) w = rng.Normal(0.0, stddev);
    } else if (init == Init::kIdentity) {
      for (int k = 0; k < std::min(in, out); ++k) layer.weight.at(k, k) = 1.0;
    }
    p.layers.push_back(std::move(layer));
  }
  return p;
}

MlpParams MakeMlp(std::initializer_list<int> widths, Activation last_activation, Rng& rng,
                  Init last_init) {
  return MakeMlp(std::span<const int>(widths.begin(), widths.size()), last_activation, rng,
                 last_init);
}

Tensor MakeConvWeight(int cin, int cout, Rng& rng, double gain) {
  Tensor w({3, 3, cin, cout});
  const double stddev = gain * std::sqrt(2.0 / (9.0 * cin));
  for (double& v : w.mutable_data()) v = rng.Normal(0.0, stddev);
  return w;
}

Var ParamBinder::operator()(const Tensor& param) {
  auto it = bound_.find(&param);
  if (it != bound_.end()) return it->second;
  Var v = tape_.Leaf(param);
  bound_.emplace(&param, v);
  return v;
}

Var MlpForward(ParamBinder& bind, const MlpParams& params, const Var& x) {
  params.Validate();
  const Shape in_shape = x.shape();
  if (in_shape.empty() || in_shape.back() != params.in_width()) {
    throw ShapeError("mlp expects trailing width " + std::to_string(params.in_width()) +
                     ", got " + ShapeString(in_shape));
  }
  const int rows = x.value().Rows();
  Var h = ops::Reshape(x, {rows, in_shape.back()});
  for (const DenseLayer& layer : params.layers) {
    h = ops::AddBias(ops::MatMul(h, bind(layer.weight)), bind(layer.bias));
    if (layer.activation == Activation::kRelu) h = ops::Relu(h);
  }
  Shape out_shape = in_shape;
  out_shape.back() = params.out_width();
  return ops::Reshape(h, out_shape);
}

Tensor MlpForward(const MlpParams& params, const Tensor& x) {
  Tape tape;
  tape.set_grad_enabled(false);
  ParamBinder bind(tape);
  return MlpForward(bind, params, tape.Constant(x)).value();
}

void AppendParams(ParamList& list, const std::string& prefix, MlpParams& mlp) {
  for (std::size_t i = 0; i < mlp.layers.size(); ++i) {
    list.emplace_back(prefix + ".l" + std::to_string(i) + ".weight", &mlp.layers[i].weight);
    list.emplace_back(prefix + ".l" + std::to_string(i) + ".bias", &mlp.layers[i].bias);
  }
}

}  // namespace radcam
