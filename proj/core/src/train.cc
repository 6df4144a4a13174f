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

#include "radcam/train.h"

#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include "radcam/parallel.h"

namespace radcam {
namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
// Per-residual L1 weights for refinement: planar position first, velocity
// last since its errors are in m/s and would otherwise dominate.
constexpr double kResidualLossWeights[9] = {2.0, 2.0, 1.0, 1.0, 1.0, 1.0, 0.5, 0.25, 0.25};

double StepLr(double base, int step, int decay_step, double decay) {
  return step >= decay_step ? base * decay : base;
}

// Copies the gradient of every bound parameter into a dense slot list.
std::vector<Tensor> CollectGrads(const ParamList& list, const ParamBinder& bind,
                                 const Gradients& grads) {
  std::vector<Tensor> out;
  out.reserve(list.size());
  for (const auto& [name, tensor] : list) {
    auto it = bind.bound().find(tensor);
    out.push_back(it == bind.bound().end() ? Tensor(tensor->shape()) : grads.Of(it->second));
  }
  return out;
}

void Accumulate(std::vector<Tensor>& total, const std::vector<Tensor>& part, double scale) {
  for (std::size_t j = 0; j < total.size(); ++j) {
    auto dst = total[j].mutable_data();
    auto src = part[j].data();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += scale * src[k];
  }
}

std::vector<Tensor> ZerosLike(const ParamList& list) {
  std::vector<Tensor> out;
  for (const auto& [name, tensor] : list) out.emplace_back(tensor->shape());
  return out;
}

void CheckLoss(double loss, const std::string& phase, int step) {
  if (!std::isfinite(loss)) {
    throw NumericError("non-finite " + phase + " loss at step " + std::to_string(step));
  }
}

}  // namespace

Optimizer::Optimizer(const ParamList& params, bool adam) : params_(params), adam_(adam) {
  if (adam_) {
    m_ = ZerosLike(params_);
    v_ = ZerosLike(params_);
  }
}

void Optimizer::Step(const std::vector<Tensor>& grads, double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(kBeta1, t_);
  const double c2 = 1.0 - std::pow(kBeta2, t_);
  for (std::size_t j = 0; j < params_.size(); ++j) {
    auto w = params_[j].second->mutable_data();
    auto g = grads[j].data();
    if (!adam_) {
      for (std::size_t k = 0; k < w.size(); ++k) w[k] -= lr * g[k];
      continue;
    }
    auto m = m_[j].mutable_data();
    auto v = v_[j].mutable_data();
    for (std::size_t k = 0; k < w.size(); ++k) {
      m[k] = kBeta1 * m[k] + (1 - kBeta1) * g[k];
      v[k] = kBeta2 * v[k] + (1 - kBeta2) * g[k] * g[k];
      w[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + kAdamEps);
    }
  }
}

void TrainFirstStage(ModelParams& params, SceneList scenes, const RunConfig& config,
                     std::vector<LossRecord>* log) {
  if (scenes.empty()) throw DataError("training needs at least one scene");
  const ParamList list = params.FirstStage();
  Optimizer opt(list, config.optimizer == "adam");
  const int n = static_cast<int>(scenes.size());
  struct Part {
    std::vector<Tensor> grads;
    double total = 0, heatmap = 0, regression = 0;
  };
  const int batch = config.batch_size > 0 ? std::min(config.batch_size, n) : n;
  Rng batch_rng(DeriveSeed(config.seed, "batches"));
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int step = 0; step < config.train_steps; ++step) {
    if (batch < n) {
      // Partial Fisher-Yates: the first `batch` entries form this step's batch.
      for (int i = 0; i < batch; ++i) std::swap(order[i], order[batch_rng.UniformInt(i, n - 1)]);
    }
    std::vector<Part> parts(batch);
    ParallelFor(batch, config.threads, [&](int b) {
      const PreparedScene& scene = *scenes[order[b]];
      Tape tape;
      ParamBinder bind(tape);
      const FirstStageOutput out = FirstStageForward(bind, scene, params, config);
      const HeadLossTerms loss = HeadLoss(out.head, scene.targets, config.regression_weight);
      parts[b].total = loss.total.value()[0];
      parts[b].heatmap = loss.heatmap;
      parts[b].regression = loss.regression;
      parts[b].grads = CollectGrads(list, bind, tape.Backward(loss.total));
    });
    LossRecord rec{"first", step, 0, 0, 0};
    std::vector<Tensor> grads = ZerosLike(list);
    for (const Part& p : parts) {
      rec.total += p.total / batch;
      rec.heatmap += p.heatmap / batch;
      rec.regression += p.regression / batch;
      Accumulate(grads, p.grads, 1.0 / batch);
    }
    CheckLoss(rec.total, "first stage", step);
    for (std::size_t j = 0; j < grads.size(); ++j) {
      CheckFinite(grads[j], "gradient of " + list[j].first + " at step " + std::to_string(step));
    }
    if (log) log->push_back(rec);
    opt.Step(grads, StepLr(config.learning_rate, step, config.lr_decay_step, config.lr_decay));
  }
}

std::vector<RefineSample> MakeRefineSamples(const PreparedScene& scene, const ModelParams& params,
                                            const RunConfig& config) {
  std::vector<Proposal> proposals = ProposeScene(scene, params, config);
  if (static_cast<int>(proposals.size()) > config.refine_proposals) {
    proposals.resize(config.refine_proposals);
  }
  const AssociationConfig assoc = MakeAssociation(config);
  std::vector<RefineSample> out;
  for (const Proposal& p : proposals) {
    RefineSample s;
    if (!PrepareRefinement(p, scene.points, scene.cameras, assoc, params.refine, &s.inputs)) {
      continue;
    }
    const Box3d* best = nullptr;
    double best_d = config.refine_match_distance;
    for (const Box3d& g : scene.gt) {
      if (g.label != p.label) continue;
      const double d = (g.center.head<2>() - p.center.head<2>()).norm();
      if (d <= best_d) {
        best_d = d;
        best = &g;
      }
    }
    s.target.assign(9, 0.0);
    if (best) {
      s.matched = true;
      const SightFrame frame = SightFrame::At(p.center.head<2>());
      const Vec3 dc = frame.ToLocal(Vec3(best->center - p.center));
      const Vec2 dv = frame.ToLocal(Vec2(best->velocity - p.velocity));
      s.target = {dc.x(), dc.y(), dc.z(),
                  std::log(best->size.x() / p.size.x()), std::log(best->size.y() / p.size.y()),
                  std::log(best->size.z() / p.size.z()), WrapAngle(best->yaw - p.yaw),
                  dv.x(), dv.y()};
    }
    out.push_back(std::move(s));
  }
  return out;
}

void TrainRefinement(ModelParams& params, SceneList scenes, const RunConfig& config,
                     std::vector<LossRecord>* log) {
  if (!params.has_refine) throw ConfigError("refinement training needs the rgpp stage");
  const int n = static_cast<int>(scenes.size());
  std::vector<std::vector<RefineSample>> samples(n);
  ParallelFor(n, config.threads,
              [&](int i) { samples[i] = MakeRefineSamples(*scenes[i], params, config); });
  int num_samples = 0;
  int num_matched = 0;
  for (const auto& v : samples) {
    for (const RefineSample& s : v) {
      ++num_samples;
      num_matched += s.matched;
    }
  }
  if (num_samples == 0) return;
  const double l1_norm = std::max(1, num_matched);

  const ParamList list = params.RefineStage();
  Optimizer opt(list, config.optimizer == "adam");
  struct Part {
    std::vector<Tensor> grads;
    double total = 0, regression = 0;
    bool used = false;
  };
  for (int step = 0; step < config.refine_steps; ++step) {
    std::vector<Part> parts(n);
    ParallelFor(n, config.threads, [&](int i) {
      if (samples[i].empty()) return;
      Tape tape;
      ParamBinder bind(tape);
      Var total;
      double l1_sum = 0;
      for (std::size_t k = 0; k < samples[i].size(); ++k) {
        const RefineSample& s = samples[i][k];
        Var out = RefinementForward(bind, s.inputs, params.refine, config.ablation.pra);
        Tensor weight({1, 9});
        if (s.matched) {
          for (int j = 0; j < 9; ++j) weight[j] = kResidualLossWeights[j];
        }
        Var l1 = ops::WeightedL1(ops::SliceCols(out, 0, 9), Tensor({1, 9}, s.target), weight,
                                 l1_norm);
        const double p = std::clamp(s.inputs.proposal.score, 1e-6, 1.0 - 1e-6);
        Var logit = ops::Add(ops::SliceCols(out, 9, 10),
                             tape.Constant(Tensor({1, 1}, {std::log(p / (1 - p))})));
        Var bce = ops::SigmoidBce(logit, Tensor({1, 1}, {s.matched ? 1.0 : 0.0}),
                                  Tensor::Full({1, 1}, 1.0), num_samples);
        Var term = ops::Add(l1, bce);
        l1_sum += l1.value()[0];
        total = k == 0 ? term : ops::Add(total, term);
      }
      parts[i].used = true;
      parts[i].total = total.value()[0];
      parts[i].regression = l1_sum;
      parts[i].grads = CollectGrads(list, bind, tape.Backward(total));
    });
    LossRecord rec{"refine", step, 0, 0, 0};
    std::vector<Tensor> grads = ZerosLike(list);
    for (const Part& p : parts) {
      if (!p.used) continue;
      rec.total += p.total;
      rec.regression += p.regression;
      Accumulate(grads, p.grads, 1.0);
    }
    CheckLoss(rec.total, "refinement", step);
    if (log) log->push_back(rec);
    opt.Step(grads, StepLr(config.refine_learning_rate, step, config.refine_decay_step,
                           config.lr_decay));
  }
}

ModelParams Train(const RunConfig& config, SceneList scenes, std::vector<LossRecord>* log) {
  ModelParams params = InitModel(config, config.seed);
  TrainFirstStage(params, scenes, config, log);
  if (config.ablation.rgpp) TrainRefinement(params, scenes, config, log);
  return params;
}

std::string LossLogCsv(std::span<const LossRecord> log) {
  std::string out = "phase,step,total,heatmap,regression\n";
  char buf[160];
  for (const LossRecord& r : log) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%.17g,%.17g,%.17g\n", r.phase.c_str(), r.step, r.total,
                  r.heatmap, r.regression);
    out += buf;
  }
  return out;
}

}  // namespace radcam
