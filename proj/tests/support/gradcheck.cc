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

#include "gradcheck.h"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace radcam::testing {

namespace {

// Largest one-sided slope gap still treated as smooth; twice-differentiable
// terms contribute about h * |f''|.
constexpr double kKinkTolerance = 1e-4;

double Loss(const Forward& f, const Tensor& w) {
  Tape tape;
  tape.set_grad_enabled(false);
  ParamBinder bind(tape);
  const Tensor& out = f(bind).value();
  double s = 0;
  for (std::size_t i = 0; i < out.size(); ++i) s += w[i] * out[i];
  return s;
}

}  // namespace

GradCheckResult CheckGradients(const Forward& f, const std::vector<Tensor*>& inputs, Rng& rng,
                               int coords_per_input, double h, double floor) {
  Tape tape;
  ParamBinder bind(tape);
  Var out = f(bind);
  Tensor w(out.shape());
  for (double& v : w.mutable_data()) v = rng.Uniform(-1.0, 1.0);
  Var loss = ops::Sum(ops::Mul(out, tape.Constant(w)));
  const Gradients grads = tape.Backward(loss);

  GradCheckResult result;
  const double mid = Loss(f, w);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    Tensor& x = *inputs[i];
    Tensor analytic(x.shape());
    const auto it = bind.bound().find(&x);
    if (it != bind.bound().end() && grads.Has(it->second)) analytic = grads.Of(it->second);
    const int n = static_cast<int>(x.size());
    std::vector<int> coords;
    if (n <= coords_per_input) {
      for (int j = 0; j < n; ++j) coords.push_back(j);
    } else {
      for (int j = 0; j < coords_per_input; ++j) coords.push_back(rng.UniformInt(0, n - 1));
    }
    for (int j : coords) {
      // A coordinate whose +-h interval straddles a kink (relu, max, a
      // bilinear cell edge) has no meaningful central difference; the one-
      // sided slopes disagree there, so draw another coordinate instead.
      double numeric = 0;
      bool smooth = false;
      for (int attempt = 0; attempt < 8 && !smooth; ++attempt) {
        if (attempt > 0) j = rng.UniformInt(0, n - 1);
        const double orig = x[j];
        x[j] = orig + h;
        const double up = Loss(f, w);
        x[j] = orig - h;
        const double down = Loss(f, w);
        x[j] = orig;
        numeric = (up - down) / (2 * h);
        const double right = (up - mid) / h, left = (mid - down) / h;
        smooth = std::abs(right - left) <= kKinkTolerance * std::max(std::abs(numeric), 1e-2);
        if (!smooth) ++result.kinks;
      }
      const double a = analytic[j];
      const double err =
          std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
      ++result.coordinates;
      if (err >= result.max_error) {
        result.max_error = err;
        std::ostringstream os;
        os << "input " << i << "[" << j << "]: analytic " << a << " numeric " << numeric;
        result.worst = os.str();
      }
    }
  }
  return result;
}

void Randomize(Tensor& t, Rng& rng, double scale) {
  for (double& v : t.mutable_data()) v = rng.Uniform(-scale, scale);
}

void Randomize(MlpParams& mlp, Rng& rng, double scale) {
  for (DenseLayer& layer : mlp.layers) {
    Randomize(layer.weight, rng, scale);
    Randomize(layer.bias, rng, scale);
  }
}

void AddInputs(std::vector<Tensor*>& inputs, MlpParams& mlp) {
  for (DenseLayer& layer : mlp.layers) {
    inputs.push_back(&layer.weight);
    inputs.push_back(&layer.bias);
  }
}

}  // namespace radcam::testing
