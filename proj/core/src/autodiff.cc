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

#include "radcam/autodiff.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace radcam {

const Tensor& Var::value() const {
  if (tape_ == nullptr) throw ContractError("use of an unbound Var");
  return tape_->value(id_);
}

bool Var::requires_grad() const { return tape_ != nullptr && tape_->requires_grad(id_); }

const Tensor& Gradients::Of(const Var& leaf) const {
  auto it = by_id_.find(leaf.id());
  if (it == by_id_.end()) throw ContractError("no gradient recorded for this node");
  return it->second;
}

Var Tape::Constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), false, false, nullptr});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::Leaf(Tensor value) {
  nodes_.push_back(Node{std::move(value), grad_enabled_, true, nullptr});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::Record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
  return Record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                std::move(backward));
}

Var Tape::Record(Tensor value, std::span<const Var> inputs, BackwardFn backward) {
  bool needs = false;
  if (grad_enabled_) {
    for (const Var& v : inputs) {
      if (v.tape() != this) throw ContractError("mixing values from different tapes");
      needs = needs || requires_grad(v.id());
    }
  }
  nodes_.push_back(Node{std::move(value), needs, false, needs ? std::move(backward) : nullptr});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Tensor* Tape::GradSlot(int id) {
  if (!nodes_[id].requires_grad) return nullptr;
  if (!grad_live_[id]) {
    grads_[id] = Tensor::Zeros(nodes_[id].value.shape());
    grad_live_[id] = true;
  }
  return &grads_[id];
}

Gradients Tape::Backward(const Var& loss) {
  if (loss.tape() != this) throw ContractError("loss belongs to another tape");
  if (loss.value().size() != 1) {
    throw ContractError("backward needs a scalar loss, got " + ShapeString(loss.shape()));
  }
  grads_.assign(nodes_.size(), Tensor());
  grad_live_.assign(nodes_.size(), false);
  if (Tensor* seed = GradSlot(loss.id())) (*seed)[0] = 1.0;
  for (int i = loss.id(); i >= 0; --i) {
    if (grad_live_[i] && nodes_[i].backward) nodes_[i].backward(grads_[i]);
  }
  std::map<int, Tensor> leaves;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!nodes_[i].is_leaf) continue;
    if (grad_live_[i]) {
      leaves.emplace(static_cast<int>(i), std::move(grads_[i]));
    } else {
      leaves.emplace(static_cast<int>(i), Tensor::Zeros(nodes_[i].value.shape()));
    }
  }
  grads_.clear();
  grad_live_.clear();
  return Gradients(std::move(leaves));
}

namespace ops {
namespace {

void RequireSameShape(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + ShapeString(a.shape()) + " vs " +
                     ShapeString(b.shape()));
  }
}

double Softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// Kept inside the open interval (0, 1) so gates never saturate to exact
// 0 or 1 and log terms stay finite.
double StableSigmoid(double x) {
  constexpr double kLow = std::numeric_limits<double>::denorm_min();
  const double kHigh = std::nextafter(1.0, 0.0);
  if (x >= 0) return std::min(1.0 / (1.0 + std::exp(-x)), kHigh);
  const double e = std::exp(x);
  return std::max(e / (1.0 + e), kLow);
}

struct BilinearTap {
  bool inside = false;
  int x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  double fx = 0, fy = 0;
};

BilinearTap MakeTap(int height, int width, double u, double v) {
  BilinearTap t;
  if (!(u >= 0.0 && v >= 0.0 && u <= width - 1 && v <= height - 1)) return t;
  t.inside = true;
  t.x0 = std::min(static_cast<int>(std::floor(u)), std::max(width - 2, 0));
  t.y0 = std::min(static_cast<int>(std::floor(v)), std::max(height - 2, 0));
  t.x1 = std::min(t.x0 + 1, width - 1);
  t.y1 = std::min(t.y0 + 1, height - 1);
  t.fx = u - t.x0;
  t.fy = v - t.y0;
  return t;
}

// Writes one bilinear sample of `map` into `out`.
void SampleInto(const double* map, int width, int channels, const BilinearTap& t, double* out) {
  const double w00 = (1 - t.fx) * (1 - t.fy), w01 = t.fx * (1 - t.fy);
  const double w10 = (1 - t.fx) * t.fy, w11 = t.fx * t.fy;
  const double* p00 = map + (static_cast<std::size_t>(t.y0) * width + t.x0) * channels;
  const double* p01 = map + (static_cast<std::size_t>(t.y0) * width + t.x1) * channels;
  const double* p10 = map + (static_cast<std::size_t>(t.y1) * width + t.x0) * channels;
  const double* p11 = map + (static_cast<std::size_t>(t.y1) * width + t.x1) * channels;
  for (int c = 0; c < channels; ++c) {
    out[c] = w00 * p00[c] + w01 * p01[c] + w10 * p10[c] + w11 * p11[c];
  }
}

// Adds the uv partials of one sample, contracted with `grad`, into du/dv.
void SampleUvGrad(const double* map, int width, int channels, const BilinearTap& t,
                  const double* grad, double* du, double* dv) {
  const double* p00 = map + (static_cast<std::size_t>(t.y0) * width + t.x0) * channels;
  const double* p01 = map + (static_cast<std::size_t>(t.y0) * width + t.x1) * channels;
  const double* p10 = map + (static_cast<std::size_t>(t.y1) * width + t.x0) * channels;
  const double* p11 = map + (static_cast<std::size_t>(t.y1) * width + t.x1) * channels;
  double gu = 0, gv = 0;
  for (int c = 0; c < channels; ++c) {
    gu += grad[c] * ((1 - t.fy) * (p01[c] - p00[c]) + t.fy * (p11[c] - p10[c]));
    gv += grad[c] * ((1 - t.fx) * (p10[c] - p00[c]) + t.fx * (p11[c] - p01[c]));
  }
  // A degenerate axis (extent 1) has no neighbor to interpolate toward.
  if (t.x1 == t.x0) gu = 0;
  if (t.y1 == t.y0) gv = 0;
  *du += gu;
  *dv += gv;
}

}  // namespace

Var MatMul(const Var& a, const Var& b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() != 2 || bv.rank() != 2 || av.dim(1) != bv.dim(0)) {
    throw ShapeError("matmul: incompatible shapes " + ShapeString(av.shape()) + " x " +
                     ShapeString(bv.shape()));
  }
  const int m = av.dim(0), k = av.dim(1), n = bv.dim(1);
  Tensor out({m, n});
  const double* A = av.data().data();
  const double* B = bv.data().data();
  double* C = out.mutable_data().data();
  for (int i = 0; i < m; ++i) {
    for (int p = 0; p < k; ++p) {
      const double aip = A[i * k + p];
      if (aip == 0.0) continue;
      const double* brow = B + static_cast<std::size_t>(p) * n;
      double* crow = C + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
  Tape* tape = a.tape();
  const int ia = a.id(), ib = b.id();
  return tape->Record(std::move(out), {a, b}, [tape, ia, ib, m, k, n](const Tensor& g) {
    const double* G = g.data().data();
    if (Tensor* ga = tape->GradSlot(ia)) {
      const double* B = tape->value(ib).data().data();
      double* GA = ga->mutable_data().data();
      for (int i = 0; i < m; ++i) {
        for (int p = 0; p < k; ++p) {
          double s = 0;
          for (int j = 0; j < n; ++j) s += G[i * n + j] * B[p * n + j];
          GA[i * k + p] += s;
        }
      }
    }
    if (Tensor* gb = tape->GradSlot(ib)) {
      const double* A = tape->value(ia).data().data();
      double* GB = gb->mutable_data().data();
      for (int i = 0; i < m; ++i) {
        for (int p = 0; p < k; ++p) {
          const double aip = A[i * k + p];
          if (aip == 0.0) continue;
          for (int j = 0; j < n; ++j) GB[p * n + j] += aip * G[i * n + j];
        }
      }
    }
  });
}

Var Add(const Var& a, const Var& b) {
  RequireSameShape(a, b, "add");
  Tensor out = a.value();
  auto o = out.mutable_data();
  auto bv = b.value().data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bv[i];
  Tape* tape = a.tape();
  const int ia = a.id(), ib = b.id();
  return tape->Record(std::move(out), {a, b}, [tape, ia, ib](const Tensor& g) {
    for (int id : {ia, ib}) {
      if (Tensor* s = tape->GradSlot(id)) {
        auto d = s->mutable_data();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i];
      }
    }
  });
}

Var Sub(const Var& a, const Var& b) {
  RequireSameShape(a, b, "sub");
  Tensor out = a.value();
  auto o = out.mutable_data();
  auto bv = b.value().data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bv[i];
  Tape* tape = a.tape();
  const int ia = a.id(), ib = b.id();
  return tape->Record(std::move(out), {a, b}, [tape, ia, ib](const Tensor& g) {
    if (Tensor* s = tape->GradSlot(ia)) {
      auto d = s->mutable_data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i];
    }
    if (Tensor* s = tape->GradSlot(ib)) {
      auto d = s->mutable_data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] -= g[i];
    }
  });
}

Var Mul(const Var& a, const Var& b) {
  RequireSameShape(a, b, "mul");
  Tensor out = a.value();
  auto o = out.mutable_data();
  auto bv = b.value().data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bv[i];
  Tape* tape = a.tape();
  const int ia = a.id(), ib = b.id();
  return tape->Record(std::move(out), {a, b}, [tape, ia, ib](const Tensor& g) {
    if (Tensor* s = tape->GradSlot(ia)) {
      auto d = s->mutable_data();
      auto other = tape->value(ib).data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i] * other[i];
    }
    if (Tensor* s = tape->GradSlot(ib)) {
      auto d = s->mutable_data();
      auto other = tape->value(ia).data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i] * other[i];
    }
  });
}

Var Scale(const Var& a, double factor) {
  Tensor out = a.value();
  for (double& v : out.mutable_data()) v *= factor;
  Tape* tape = a.tape();
  const int ia = a.id();
  return tape->Record(std::move(out), {a}, [tape, ia, factor](const Tensor& g) {
    if (Tensor* s = tape->GradSlot(ia)) {
      auto d = s->mutable_data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += factor * g[i];
    }
  });
}

Var AddBias(const Var& x, const Var& bias) {
  const Tensor& xv = x.value();
  const Tensor& bv = bias.value();
  if (bv.rank() != 1 || bv.dim(0) != xv.Cols()) {
    throw ShapeError("add_bias: bias " + ShapeString(bv.shape()) + " vs input " +
                     ShapeString(xv.shape()));
  }
  const int rows = xv.Rows(), cols = xv.Cols();
  Tensor out = xv;
  double* o = out.mutable_data().data();
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) o[r * cols + c] += bv[c];
  }
  Tape* tape = x.tape();
  const int ix = x.id(), ib = bias.id();
  return tape->Record(std::move(out), {x, bias}, [tape, ix, ib, rows, cols](const Tensor& g) {
    if (Tensor* s = tape->GradSlot(ix)) {
      auto d = s->mutable_data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i];
    }
    if (Tensor* s = tape->GradSlot(ib)) {
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) (*s)[c] += g[r * cols + c];
      }
    }
  });
}

Var ScaleRows(const Var& x, const Var& s) {
  const Tensor& xv = x.value();
  const Tensor& sv = s.value();
  const int rows = xv.Rows(), cols = xv.Cols();
  if (static_cast<int>(sv.size()) != rows) {
    throw ShapeError("scale_rows: " + std::to_string(sv.size()) + " scales for " +
                     std::to_string(rows) + " rows");
  }
  Tensor out = xv;
  double* o = out.mutable_data().data();
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) o[r * cols + c] *= sv[r];
  }
  Tape* tape = x.tape();
  const int ix = x.id(), is = s.id();
  return tape->Record(std::move(out), {x, s}, [tape, ix, is, rows, cols](const Tensor& g) {
    if (Tensor* gx = tape->GradSlot(ix)) {
      const Tensor& sv = tape->value(is);
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) (*gx)[r * cols + c] += g[r * cols + c] * sv[r];
      }
    }
    if (Tensor* gs = tape->GradSlot(is)) {
      const Tensor& xv = tape->value(ix);
      for (int r = 0; r < rows; ++r) {
        double acc = 0;
        for (int c = 0; c < cols; ++c) acc += g[r * cols + c] * xv[r * cols + c];
        (*gs)[r] += acc;
      }
    }
  });
}

Var Relu(const Var& x) {
  Tensor out = x.value();
  for (double& v : out.mutable_data()) v = v > 0 ? v : 0.0;
  Tape* tape = x.tape();
  const int ix = x.id();
  return tape->Record(std::move(out), {x}, [tape, ix](const Tensor& g) {
    if (Tensor* s = tape->GradSlot(ix)) {
      const Tensor& xv = tape->value(ix);
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (xv[i] > 0) (*s)[i] += g[i];
      }
    }
  });
}

Var Sigmoid(const Var& x) {
  Tensor out = x.value();
  for (double& v : out.mutable_data()) v = StableSigmoid(v);
  Tape* tape = x.tape();
  const int ix = x.id();
  auto y = std::make_shared<Tensor>(out);
  return tape->Record(std::move(out), {x}, [tape, ix, y](const Tensor& g) {
    if (Tensor* s = tape->GradSlot(ix)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*s)[i] += g[i] * (*y)[i] * (1.0 - (*y)[i]);
    }
  });
}

Var Softmax(const Var& x) {
  const Tensor& xv = x.value();
  if (xv.size() == 0 || xv.Cols() == 0) throw ShapeError("softmax of empty input");
  const int rows = xv.Rows(), cols = xv.Cols();
  Tensor out(xv.shape());
  for (int r = 0; r < rows; ++r) {
    const double* in = xv.data().data() + static_cast<std::size_t>(r) * cols;
    double* o = out.mutable_data().data() + static_cast<std::size_t>(r) * cols;
    double mx = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < cols; ++c) mx = std::max(mx, in[c]);
    double total = 0;
    for (int c = 0; c < cols; ++c) total += (o[c] = std::exp(in[c] - mx));
    for (int c = 0; c < cols; ++c) o[c] /= total;
  }
  Tape* tape = x.tape();
  const int ix = x.id();
  auto y = std::make_shared<Tensor>(out);
  return tape->Record(std::move(out), {x}, [tape, ix, y, rows, cols](const Tensor& g) {
    if (Tensor* s = tape->GradSlot(ix)) {
      for (int r = 0; r < rows; ++r) {
        const std::size_t base = static_cast<std::size_t>(r) * cols;
        double dot = 0;
        for (int c = 0; c < cols; ++c) dot += g[base + c] * (*y)[base + c];
        for (int c = 0; c < cols; ++c) (*s)[base + c] += (*y)[base + c] * (g[base + c] - dot);
      }
    }
  });
}

Var Sum(const Var& x) {
  double total = 0;
  for (double v : x.value().data()) total += v;
  Tape* tape = x.tape();
  const int ix = x.id();
  return tape->Record(Tensor::Scalar(total), {x}, [tape, ix](const Tensor& g) {
    if (Tensor* s = tape->GradSlot(ix)) {
      for (double& v : s->mutable_data()) v += g[0];
    }
  });
}

Var Mean(const Var& x) { return Scale(Sum(x), 1.0 / static_cast<double>(x.value().size())); }

Var Reshape(const Var& x, Shape shape) {
  Tensor out = x.value().Reshaped(std::move(shape));
  Tape* tape = x.tape();
  const int ix = x.id();
  return tape->Record(std::move(out), {x}, [tape, ix](const Tensor& g) {
    if (Tensor* s = tape->GradSlot(ix)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*s)[i] += g[i];
    }
  });
}

Var Concat(std::initializer_list<Var> parts) {
  return Concat(std::span<const Var>(parts.begin(), parts.size()));
}

Var Concat(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat of nothing");
  const int rows = parts[0].value().Rows();
  std::vector<int> widths;
  int total = 0;
  for (const Var& p : parts) {
    if (p.value().Rows() != rows) throw ShapeError("concat: leading extents differ");
    widths.push_back(p.value().Cols());
    total += widths.back();
  }
  Shape shape = parts[0].shape();
  if (shape.empty()) shape = {1};
  shape.back() = total;
  Tensor out(shape);
  double* o = out.mutable_data().data();
  int offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const double* in = parts[k].value().data().data();
    const int w = widths[k];
    for (int r = 0; r < rows; ++r) {
      std::copy(in + static_cast<std::size_t>(r) * w, in + static_cast<std::size_t>(r + 1) * w,
                o + static_cast<std::size_t>(r) * total + offset);
    }
    offset += w;
  }
  Tape* tape = parts[0].tape();
  std::vector<int> ids;
  for (const Var& p : parts) ids.push_back(p.id());
  return tape->Record(std::move(out), parts, [tape, ids, widths, rows, total](const Tensor& g) {
    int offset = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const int w = widths[k];
      if (Tensor* s = tape->GradSlot(ids[k])) {
        for (int r = 0; r < rows; ++r) {
          for (int c = 0; c < w; ++c) {
            (*s)[static_cast<std::size_t>(r) * w + c] +=
                g[static_cast<std::size_t>(r) * total + offset + c];
          }
        }
      }
      offset += w;
    }
  });
}

Var SliceCols(const Var& x, int begin, int end) {
  const Tensor& xv = x.value();
  const int rows = xv.Rows(), cols = xv.Cols();
  if (begin < 0 || end > cols || begin >= end) {
    throw ShapeError("slice_cols: bad range [" + std::to_string(begin) + ", " +
                     std::to_string(end) + ") of " + std::to_string(cols));
  }
  const int w = end - begin;
  Shape shape = xv.shape();
  shape.back() = w;
  Tensor out(shape);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < w; ++c) {
      out[static_cast<std::size_t>(r) * w + c] = xv[static_cast<std::size_t>(r) * cols + begin + c];
    }
  }
  Tape* tape = x.tape();
  const int ix = x.id();
  return tape->Record(std::move(out), {x}, [tape, ix, rows, cols, begin, w](const Tensor& g) {
    if (Tensor* s = tape->GradSlot(ix)) {
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < w; ++c) {
          (*s)[static_cast<std::size_t>(r) * cols + begin + c] +=
              g[static_cast<std::size_t>(r) * w + c];
        }
      }
    }
  });
}

Var GatherRows(const Var& x, std::span<const int> rows) {
  const Tensor& xv = x.value();
  const int n = xv.Rows(), cols = xv.Cols();
  const int m = static_cast<int>(rows.size());
  if (m == 0) throw ShapeError("gather_rows: empty index list");
  Tensor out({m, cols});
  for (int i = 0; i < m; ++i) {
    if (rows[i] < 0 || rows[i] >= n) throw ShapeError("gather_rows: index out of range");
    std::copy_n(xv.data().data() + static_cast<std::size_t>(rows[i]) * cols, cols,
                out.mutable_data().data() + static_cast<std::size_t>(i) * cols);
  }
  Tape* tape = x.tape();
  const int ix = x.id();
  std::vector<int> idx(rows.begin(), rows.end());
  return tape->Record(std::move(out), {x}, [tape, ix, idx, cols](const Tensor& g) {
    if (Tensor* s = tape->GradSlot(ix)) {
      for (std::size_t i = 0; i < idx.size(); ++i) {
        for (int c = 0; c < cols; ++c) {
          (*s)[static_cast<std::size_t>(idx[i]) * cols + c] += g[i * cols + c];
        }
      }
    }
  });
}

Var SegmentMax(const Var& x, std::span<const int> segment, int num_segments) {
  const Tensor& xv = x.value();
  const int n = xv.Rows(), cols = xv.Cols();
  if (static_cast<int>(segment.size()) != n) throw ShapeError("segment_max: id count mismatch");
  if (num_segments <= 0) throw ShapeError("segment_max: no segments");
  Tensor out({num_segments, cols});
  auto argmax = std::make_shared<std::vector<int>>(static_cast<std::size_t>(num_segments) * cols, -1);
  for (int r = 0; r < n; ++r) {
    const int s = segment[r];
    if (s < 0 || s >= num_segments) throw ShapeError("segment_max: segment id out of range");
    for (int c = 0; c < cols; ++c) {
      const std::size_t o = static_cast<std::size_t>(s) * cols + c;
      const double v = xv[static_cast<std::size_t>(r) * cols + c];
      if ((*argmax)[o] < 0 || v > out[o]) {
        out[o] = v;
        (*argmax)[o] = r;
      }
    }
  }
  Tape* tape = x.tape();
  const int ix = x.id();
  return tape->Record(std::move(out), {x}, [tape, ix, argmax, cols](const Tensor& g) {
    if (Tensor* s = tape->GradSlot(ix)) {
      for (std::size_t o = 0; o < argmax->size(); ++o) {
        const int r = (*argmax)[o];
        if (r >= 0) (*s)[static_cast<std::size_t>(r) * cols + o % cols] += g[o];
      }
    }
  });
}

Var SegmentSum(const Var& x, std::span<const int> segment, int num_segments) {
  const Tensor& xv = x.value();
  const int n = xv.Rows(), cols = xv.Cols();
  if (static_cast<int>(segment.size()) != n) throw ShapeError("segment_sum: id count mismatch");
  Tensor out({num_segments, cols});
  for (int r = 0; r < n; ++r) {
    const int s = segment[r];
    if (s < 0 || s >= num_segments) throw ShapeError("segment_sum: segment id out of range");
    for (int c = 0; c < cols; ++c) {
      out[static_cast<std::size_t>(s) * cols + c] += xv[static_cast<std::size_t>(r) * cols + c];
    }
  }
  Tape* tape = x.tape();
  const int ix = x.id();
  std::vector<int> seg(segment.begin(), segment.end());
  return tape->Record(std::move(out), {x}, [tape, ix, seg, cols](const Tensor& g) {
    if (Tensor* s = tape->GradSlot(ix)) {
      for (std::size_t r = 0; r < seg.size(); ++r) {
        for (int c = 0; c < cols; ++c) {
          (*s)[r * cols + c] += g[static_cast<std::size_t>(seg[r]) * cols + c];
        }
      }
    }
  });
}

Var WeightedGroupSum(const Var& x, const Var& w) {
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  if (wv.rank() != 2) throw ShapeError("weighted_group_sum: weights must be [N x G]");
  const int n = wv.dim(0), groups = wv.dim(1), cols = xv.Cols();
  if (xv.Rows() != n * groups) throw ShapeError("weighted_group_sum: row count mismatch");
  Tensor out({n, cols});
  for (int i = 0; i < n; ++i) {
    double* o = out.mutable_data().data() + static_cast<std::size_t>(i) * cols;
    for (int k = 0; k < groups; ++k) {
      const double wk = wv[static_cast<std::size_t>(i) * groups + k];
      const double* in = xv.data().data() + (static_cast<std::size_t>(i) * groups + k) * cols;
      for (int c = 0; c < cols; ++c) o[c] += wk * in[c];
    }
  }
  Tape* tape = x.tape();
  const int ix = x.id(), iw = w.id();
  return tape->Record(std::move(out), {x, w}, [tape, ix, iw, n, groups, cols](const Tensor& g) {
    Tensor* gx = tape->GradSlot(ix);
    Tensor* gw = tape->GradSlot(iw);
    const Tensor& xv = tape->value(ix);
    const Tensor& wv = tape->value(iw);
    for (int i = 0; i < n; ++i) {
      const double* go = g.data().data() + static_cast<std::size_t>(i) * cols;
      for (int k = 0; k < groups; ++k) {
        const std::size_t row = static_cast<std::size_t>(i) * groups + k;
        if (gx) {
          const double wk = wv[row];
          double* d = gx->mutable_data().data() + row * cols;
          for (int c = 0; c < cols; ++c) d[c] += wk * go[c];
        }
        if (gw) {
          const double* in = xv.data().data() + row * cols;
          double acc = 0;
          for (int c = 0; c < cols; ++c) acc += go[c] * in[c];
          (*gw)[row] += acc;
        }
      }
    }
  });
}

Var BilinearGather(const Var& map, const Var& uv) {
  const Tensor& mv = map.value();
  const Tensor& uvv = uv.value();
  if (mv.rank() != 3) throw ShapeError("bilinear_gather: map must be [H x W x C]");
  if (uvv.rank() != 2 || uvv.dim(1) != 2) throw ShapeError("bilinear_gather: uv must be [N x 2]");
  const int height = mv.dim(0), width = mv.dim(1), channels = mv.dim(2);
  const int n = uvv.dim(0);
  Tensor out({n, channels});
  auto taps = std::make_shared<std::vector<BilinearTap>>(n);
  for (int i = 0; i < n; ++i) {
    (*taps)[i] = MakeTap(height, width, uvv[2 * i], uvv[2 * i + 1]);
    if ((*taps)[i].inside) {
      SampleInto(mv.data().data(), width, channels, (*taps)[i],
                 out.mutable_data().data() + static_cast<std::size_t>(i) * channels);
    }
  }
  Tape* tape = map.tape();
  const int im = map.id(), iu = uv.id();
  return tape->Record(std::move(out), {map, uv},
                      [tape, im, iu, taps, width, channels](const Tensor& g) {
    Tensor* gm = tape->GradSlot(im);
    Tensor* gu = tape->GradSlot(iu);
    const double* mapv = tape->value(im).data().data();
    for (std::size_t i = 0; i < taps->size(); ++i) {
      const BilinearTap& t = (*taps)[i];
      if (!t.inside) continue;
      const double* go = g.data().data() + i * channels;
      if (gm) {
        double* d = gm->mutable_data().data();
        const double w00 = (1 - t.fx) * (1 - t.fy), w01 = t.fx * (1 - t.fy);
        const double w10 = (1 - t.fx) * t.fy, w11 = t.fx * t.fy;
        double* p00 = d + (static_cast<std::size_t>(t.y0) * width + t.x0) * channels;
        double* p01 = d + (static_cast<std::size_t>(t.y0) * width + t.x1) * channels;
        double* p10 = d + (static_cast<std::size_t>(t.y1) * width + t.x0) * channels;
        double* p11 = d + (static_cast<std::size_t>(t.y1) * width + t.x1) * channels;
        for (int c = 0; c < channels; ++c) {
          p00[c] += w00 * go[c];
          p01[c] += w01 * go[c];
          p10[c] += w10 * go[c];
          p11[c] += w11 * go[c];
        }
      }
      if (gu) {
        SampleUvGrad(mapv, width, channels, t, go, &(*gu)[2 * i], &(*gu)[2 * i + 1]);
      }
    }
  });
}

Var BilinearGatherConst(std::span<const Tensor* const> maps, std::span<const int> map_index,
                        const Var& uv) {
  const Tensor& uvv = uv.value();
  if (uvv.rank() != 2 || uvv.dim(1) != 2) throw ShapeError("bilinear_gather: uv must be [N x 2]");
  const int n = uvv.dim(0);
  if (static_cast<int>(map_index.size()) != n) throw ShapeError("bilinear_gather: index count");
  if (maps.empty()) throw ShapeError("bilinear_gather: no maps");
  const int channels = maps[0]->dim(2);
  for (const Tensor* m : maps) {
    if (m->rank() != 3 || m->dim(2) != channels) throw ShapeError("bilinear_gather: map channels");
  }
  Tensor out({n, channels});
  auto taps = std::make_shared<std::vector<BilinearTap>>(n);
  for (int i = 0; i < n; ++i) {
    const Tensor& m = *maps[map_index[i]];
    (*taps)[i] = MakeTap(m.dim(0), m.dim(1), uvv[2 * i], uvv[2 * i + 1]);
    if ((*taps)[i].inside) {
      SampleInto(m.data().data(), m.dim(1), channels, (*taps)[i],
                 out.mutable_data().data() + static_cast<std::size_t>(i) * channels);
    }
  }
  Tape* tape = uv.tape();
  const int iu = uv.id();
  std::vector<const Tensor*> map_ptrs(maps.begin(), maps.end());
  std::vector<int> index(map_index.begin(), map_index.end());
  return tape->Record(std::move(out), {uv},
                      [tape, iu, taps, map_ptrs, index, channels](const Tensor& g) {
    Tensor* gu = tape->GradSlot(iu);
    if (!gu) return;
    for (std::size_t i = 0; i < taps->size(); ++i) {
      const BilinearTap& t = (*taps)[i];
      if (!t.inside) continue;
      const Tensor& m = *map_ptrs[index[i]];
      SampleUvGrad(m.data().data(), m.dim(1), channels, t, g.data().data() + i * channels,
                   &(*gu)[2 * i], &(*gu)[2 * i + 1]);
    }
  });
}

Var Conv3x3(const Var& x, const Var& w, const Var& b) {
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  const Tensor& bv = b.value();
  if (xv.rank() != 3) throw ShapeError("conv3x3: input must be [H x W x C]");
  const int height = xv.dim(0), width = xv.dim(1), cin = xv.dim(2);
  if (wv.rank() != 4 || wv.dim(0) != 3 || wv.dim(1) != 3 || wv.dim(2) != cin) {
    throw ShapeError("conv3x3: weight " + ShapeString(wv.shape()) + " for input " +
                     ShapeString(xv.shape()));
  }
  const int cout = wv.dim(3);
  if (bv.rank() != 1 || bv.dim(0) != cout) throw ShapeError("conv3x3: bias width");
  Tensor out({height, width, cout});
  const double* X = xv.data().data();
  const double* W = wv.data().data();
  double* O = out.mutable_data().data();
  for (int h = 0; h < height; ++h) {
    for (int col = 0; col < width; ++col) {
      double* o = O + (static_cast<std::size_t>(h) * width + col) * cout;
      for (int c = 0; c < cout; ++c) o[c] = bv[c];
      for (int dy = 0; dy < 3; ++dy) {
        const int yy = h + dy - 1;
        if (yy < 0 || yy >= height) continue;
        for (int dx = 0; dx < 3; ++dx) {
          const int xx = col + dx - 1;
          if (xx < 0 || xx >= width) continue;
          const double* in = X + (static_cast<std::size_t>(yy) * width + xx) * cin;
          const double* wt = W + static_cast<std::size_t>(dy * 3 + dx) * cin * cout;
          for (int i = 0; i < cin; ++i) {
            const double xi = in[i];
            if (xi == 0.0) continue;
            const double* wrow = wt + static_cast<std::size_t>(i) * cout;
            for (int c = 0; c < cout; ++c) o[c] += xi * wrow[c];
          }
        }
      }
    }
  }
  Tape* tape = x.tape();
  const int ix = x.id(), iw = w.id(), ib = b.id();
  return tape->Record(std::move(out), {x, w, b},
                      [tape, ix, iw, ib, height, width, cin, cout](const Tensor& g) {
    Tensor* gx = tape->GradSlot(ix);
    Tensor* gw = tape->GradSlot(iw);
    Tensor* gb = tape->GradSlot(ib);
    const double* X = tape->value(ix).data().data();
    const double* W = tape->value(iw).data().data();
    const double* G = g.data().data();
    for (int h = 0; h < height; ++h) {
      for (int col = 0; col < width; ++col) {
        const double* go = G + (static_cast<std::size_t>(h) * width + col) * cout;
        if (gb) {
          for (int c = 0; c < cout; ++c) (*gb)[c] += go[c];
        }
        for (int dy = 0; dy < 3; ++dy) {
          const int yy = h + dy - 1;
          if (yy < 0 || yy >= height) continue;
          for (int dx = 0; dx < 3; ++dx) {
            const int xx = col + dx - 1;
            if (xx < 0 || xx >= width) continue;
            const std::size_t in_off = (static_cast<std::size_t>(yy) * width + xx) * cin;
            const std::size_t w_off = static_cast<std::size_t>(dy * 3 + dx) * cin * cout;
            for (int i = 0; i < cin; ++i) {
              const double* wrow = W + w_off + static_cast<std::size_t>(i) * cout;
              if (gx) {
                double acc = 0;
                for (int c = 0; c < cout; ++c) acc += go[c] * wrow[c];
                (*gx)[in_off + i] += acc;
              }
              if (gw) {
                const double xi = X[in_off + i];
                if (xi == 0.0) continue;
                double* gwrow = gw->mutable_data().data() + w_off + static_cast<std::size_t>(i) * cout;
                for (int c = 0; c < cout; ++c) gwrow[c] += xi * go[c];
              }
            }
          }
        }
      }
    }
  });
}

Var LayerNorm(const Var& x, const Var& gain, const Var& bias, double eps) {
  const Tensor& xv = x.value();
  const int rows = xv.Rows(), cols = xv.Cols();
  if (gain.value().size() != static_cast<std::size_t>(cols) ||
      bias.value().size() != static_cast<std::size_t>(cols)) {
    throw ShapeError("layer_norm: gain/bias width mismatch");
  }
  Tensor out(xv.shape());
  auto xhat = std::make_shared<std::vector<double>>(xv.size());
  auto inv_std = std::make_shared<std::vector<double>>(rows);
  const Tensor& gv = gain.value();
  const Tensor& bv = bias.value();
  for (int r = 0; r < rows; ++r) {
    const std::size_t base = static_cast<std::size_t>(r) * cols;
    double mean = 0;
    for (int c = 0; c < cols; ++c) mean += xv[base + c];
    mean /= cols;
    double var = 0;
    for (int c = 0; c < cols; ++c) var += (xv[base + c] - mean) * (xv[base + c] - mean);
    var /= cols;
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = is;
    for (int c = 0; c < cols; ++c) {
      const double h = (xv[base + c] - mean) * is;
      (*xhat)[base + c] = h;
      out[base + c] = gv[c] * h + bv[c];
    }
  }
  Tape* tape = x.tape();
  const int ix = x.id(), ig = gain.id(), ib = bias.id();
  return tape->Record(std::move(out), {x, gain, bias},
                      [tape, ix, ig, ib, xhat, inv_std, rows, cols](const Tensor& g) {
    Tensor* gx = tape->GradSlot(ix);
    Tensor* gg = tape->GradSlot(ig);
    Tensor* gb = tape->GradSlot(ib);
    const Tensor& gv = tape->value(ig);
    for (int r = 0; r < rows; ++r) {
      const std::size_t base = static_cast<std::size_t>(r) * cols;
      double mean_gh = 0, mean_ghh = 0;
      for (int c = 0; c < cols; ++c) {
        const double gh = g[base + c] * gv[c];
        mean_gh += gh;
        mean_ghh += gh * (*xhat)[base + c];
        if (gg) (*gg)[c] += g[base + c] * (*xhat)[base + c];
        if (gb) (*gb)[c] += g[base + c];
      }
      if (!gx) continue;
      mean_gh /= cols;
      mean_ghh /= cols;
      for (int c = 0; c < cols; ++c) {
        const double gh = g[base + c] * gv[c];
        (*gx)[base + c] += (*inv_std)[r] * (gh - mean_gh - (*xhat)[base + c] * mean_ghh);
      }
    }
  });
}

Var FocalLoss(const Var& logits, const Tensor& target, double normalizer, double alpha,
              double beta) {
  const Tensor& xv = logits.value();
  if (xv.shape() != target.shape()) throw ShapeError("focal_loss: target shape");
  double total = 0;
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const double x = xv[i];
    const double p = StableSigmoid(x);
    if (target[i] >= 1.0 - 1e-12) {
      total += -std::pow(1 - p, alpha) * (-Softplus(-x));
    } else {
      total += -std::pow(1 - target[i], beta) * std::pow(p, alpha) * (-Softplus(x));
    }
  }
  Tape* tape = logits.tape();
  const int ix = logits.id();
  auto t = std::make_shared<Tensor>(target);
  return tape->Record(Tensor::Scalar(total / normalizer), {logits},
                      [tape, ix, t, normalizer, alpha, beta](const Tensor& g) {
    Tensor* gx = tape->GradSlot(ix);
    if (!gx) return;
    const Tensor& xv = tape->value(ix);
    const double scale = g[0] / normalizer;
    for (std::size_t i = 0; i < xv.size(); ++i) {
      const double x = xv[i];
      const double p = StableSigmoid(x);
      double d;
      if ((*t)[i] >= 1.0 - 1e-12) {
        const double log_p = -Softplus(-x);
        d = alpha * p * std::pow(1 - p, alpha) * log_p - std::pow(1 - p, alpha + 1);
      } else {
        const double log_q = -Softplus(x);
        d = -std::pow(1 - (*t)[i], beta) *
            (alpha * std::pow(p, alpha) * (1 - p) * log_q - std::pow(p, alpha + 1));
      }
      (*gx)[i] += scale * d;
    }
  });
}

Var WeightedL1(const Var& pred, const Tensor& target, const Tensor& weight, double normalizer) {
  const Tensor& pv = pred.value();
  if (pv.shape() != target.shape() || pv.shape() != weight.shape()) {
    throw ShapeError("weighted_l1: shape mismatch");
  }
  double total = 0;
  for (std::size_t i = 0; i < pv.size(); ++i) total += weight[i] * std::abs(pv[i] - target[i]);
  Tape* tape = pred.tape();
  const int ip = pred.id();
  auto t = std::make_shared<Tensor>(target);
  auto w = std::make_shared<Tensor>(weight);
  return tape->Record(Tensor::Scalar(total / normalizer), {pred},
                      [tape, ip, t, w, normalizer](const Tensor& g) {
    Tensor* gp = tape->GradSlot(ip);
    if (!gp) return;
    const Tensor& pv = tape->value(ip);
    for (std::size_t i = 0; i < pv.size(); ++i) {
      const double diff = pv[i] - (*t)[i];
      const double sign = diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0);
      (*gp)[i] += g[0] * (*w)[i] * sign / normalizer;
    }
  });
}

Var SigmoidBce(const Var& logits, const Tensor& target, const Tensor& weight, double normalizer) {
  const Tensor& xv = logits.value();
  if (xv.shape() != target.shape() || xv.shape() != weight.shape()) {
    throw ShapeError("sigmoid_bce: shape mismatch");
  }
  double total = 0;
  for (std::size_t i = 0; i < xv.size(); ++i) {
    total += weight[i] * (Softplus(xv[i]) - target[i] * xv[i]);
  }
  Tape* tape = logits.tape();
  const int ix = logits.id();
  auto t = std::make_shared<Tensor>(target);
  auto w = std::make_shared<Tensor>(weight);
  return tape->Record(Tensor::Scalar(total / normalizer), {logits},
                      [tape, ix, t, w, normalizer](const Tensor& g) {
    Tensor* gx = tape->GradSlot(ix);
    if (!gx) return;
    const Tensor& xv = tape->value(ix);
    for (std::size_t i = 0; i < xv.size(); ++i) {
      (*gx)[i] += g[0] * (*w)[i] * (StableSigmoid(xv[i]) - (*t)[i]) / normalizer;
    }
  });
}

}  // namespace ops

std::vector<double> BilinearSample(const Tensor& map, double u, double v, bool* clipped) {
  if (map.rank() != 3) throw ShapeError("bilinear_sample: map must be [H x W x C]");
  const int channels = map.dim(2);
  std::vector<double> out(channels, 0.0);
  const ops::BilinearTap t = ops::MakeTap(map.dim(0), map.dim(1), u, v);
  if (clipped) *clipped = !t.inside;
  if (t.inside) ops::SampleInto(map.data().data(), map.dim(1), channels, t, out.data());
  return out;
}

}  // namespace radcam
