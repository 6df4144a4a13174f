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

#ifndef RADCAM_MLP_H_
#define RADCAM_MLP_H_

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "radcam/autodiff.h"
#include "radcam/random.h"

namespace radcam {

enum class Activation { kRelu, kNone };

// Fully connected layer applied over the trailing axis: y = x W + b.
struct DenseLayer {
  Tensor weight;  // [in x out]
  Tensor bias;    // [out]
  Activation activation = Activation::kNone;

  int in_width() const { return weight.dim(0); }
  int out_width() const { return weight.dim(1); }
};

struct MlpParams {
  std::vector<DenseLayer> layers;

  int in_width() const;
  int out_width() const;
  // Throws ShapeError unless out_i == in_{i+1} and biases match.
  void Validate() const;
};

enum class Init { kHe, kZero, kIdentity };

// widths = {in, hidden..., out}; hidden layers use relu, the last layer uses
// `last_activation`; `last_init` controls the final layer's weights.
MlpParams MakeMlp(std::span<const int> widths, Activation last_activation, Rng& rng,
                  Init last_init = Init::kHe);
MlpParams MakeMlp(std::initializer_list<int> widths, Activation last_activation, Rng& rng,
                  Init last_init = Init::kHe);

// Conv weights [3 x 3 x cin x cout] with He-scaled normal values.
Tensor MakeConvWeight(int cin, int cout, Rng& rng, double gain = 1.0);

// Binds parameter tensors to tape leaves, one leaf per parameter address.
class ParamBinder {
 public:
  explicit ParamBinder(Tape& tape) : tape_(tape) {}
  Var operator()(const Tensor& param);
  Tape& tape() { return tape_; }
  const std::map<const Tensor*, Var>& bound() const { return bound_; }

 private:
  Tape& tape_;
  std::map<const Tensor*, Var> bound_;
};

// Applies every layer over the trailing axis of x.
Var MlpForward(ParamBinder& bind, const MlpParams& params, const Var& x);
Tensor MlpForward(const MlpParams& params, const Tensor& x);

// Named views of every learnable tensor in a model, in a fixed order.
using ParamList = std::vector<std::pair<std::string, Tensor*>>;
void AppendParams(ParamList& list, const std::string& prefix, MlpParams& mlp);

}  // namespace radcam

#endif  // RADCAM_MLP_H_
