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

#include "radcam/plots.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string_view>

namespace radcam {
namespace {

constexpr double kWidth = 480;
constexpr double kHeight = 360;
constexpr double kPad = 48;
constexpr const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"};

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

// Maps data coordinates into the padded plot area; y grows upward.
struct Frame {
  double x0, x1, y0, y1;
  double X(double x) const { return kPad + (x - x0) / (x1 - x0) * (kWidth - 2 * kPad); }
  double Y(double y) const { return kHeight - kPad - (y - y0) / (y1 - y0) * (kHeight - 2 * kPad); }
};

std::string Header(std::string_view title, const Frame& f, std::string_view xlabel,
                   std::string_view ylabel) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + Num(kWidth) +
                  "\" height=\"" + Num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + Num(kWidth / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
       std::string(title) + "</text>\n";
  s += "<rect x=\"" + Num(kPad) + "\" y=\"" + Num(kPad) + "\" width=\"" + Num(kWidth - 2 * kPad) +
       "\" height=\"" + Num(kHeight - 2 * kPad) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 4;
    const double yv = f.y0 + (f.y1 - f.y0) * i / 4;
    s += "<text x=\"" + Num(f.X(xv)) + "\" y=\"" + Num(kHeight - kPad + 14) +
         "\" text-anchor=\"middle\">" + Num(xv) + "</text>\n";
    s += "<text x=\"" + Num(kPad - 4) + "\" y=\"" + Num(f.Y(yv) + 4) +
         "\" text-anchor=\"end\">" + Num(yv) + "</text>\n";
  }
  s += "<text x=\"" + Num(kWidth / 2) + "\" y=\"" + Num(kHeight - 8) +
       "\" text-anchor=\"middle\">" + std::string(xlabel) + "</text>\n";
  s += "<text x=\"12\" y=\"" + Num(kHeight / 2) + "\" transform=\"rotate(-90 12 " +
       Num(kHeight / 2) + ")\" text-anchor=\"middle\">" + std::string(ylabel) + "</text>\n";
  return s;
}

std::string Polyline(const Frame& f, std::span<const double> xs, std::span<const double> ys,
                     const char* color) {
  std::string s = "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) s += Num(f.X(xs[i])) + "," + Num(f.Y(ys[i])) + " ";
  return s + "\"/>\n";
}

std::string Legend(int row, const std::string& label, const char* color) {
  const double y = kPad + 14 + 14 * row;
  return "<line x1=\"" + Num(kWidth - kPad - 90) + "\" y1=\"" + Num(y - 4) + "\" x2=\"" +
         Num(kWidth - kPad - 74) + "\" y2=\"" + Num(y - 4) + "\" stroke=\"" + color +
         "\" stroke-width=\"2\"/>\n<text x=\"" + Num(kWidth - kPad - 70) + "\" y=\"" + Num(y) +
         "\">" + label + "</text>\n";
}

}  // namespace

std::string PrCurveSvg(const Metrics& metrics, ObjectClass label) {
  const Frame f{0, 1, 0, 1};
  const int c = static_cast<int>(label);
  std::string s = Header("precision-recall: " + std::string(ClassName(label)), f, "recall",
                         "precision");
  for (std::size_t t = 0; t < kMatchThresholds.size(); ++t) {
    const MatchResult& m = metrics.curves[c][t];
    s += Polyline(f, m.recall, m.precision, kColors[t]);
    s += Legend(static_cast<int>(t), Num(kMatchThresholds[t]) + " m  AP " + Num(metrics.classes[c].ap[t]),
                kColors[t]);
  }
  return s + "</svg>\n";
}

std::string LossCurveSvg(std::span<const LossRecord> log) {
  std::vector<std::string> phases;
  for (const LossRecord& r : log) {
    if (std::find(phases.begin(), phases.end(), r.phase) == phases.end()) phases.push_back(r.phase);
  }
  double max_step = 1, max_loss = 1e-9;
  for (const LossRecord& r : log) {
    max_step = std::max(max_step, static_cast<double>(r.step));
    if (std::isfinite(r.total)) max_loss = std::max(max_loss, r.total);
  }
  const Frame f{0, max_step, 0, max_loss};
  std::string s = Header("training loss", f, "step", "loss");
  for (std::size_t p = 0; p < phases.size(); ++p) {
    std::vector<double> xs, ys;
    for (const LossRecord& r : log) {
      if (r.phase != phases[p]) continue;
      xs.push_back(r.step);
      ys.push_back(r.total);
    }
    s += Polyline(f, xs, ys, kColors[p % 4]);
    s += Legend(static_cast<int>(p), phases[p], kColors[p % 4]);
  }
  return s + "</svg>\n";
}

std::string BevScatterSvg(std::span<const Box3d> gt, std::span<const Detection> dets,
                          const BevGridSpec& spec, double min_score) {
  // Plot x = ego y (left positive to the left), y = ego x (forward up).
  const Frame f{spec.y_max, spec.y_min, spec.x_min, spec.x_max};
  std::string s = Header("BEV: gt (green) vs detections (red)", f, "y (m)", "x (m)");
  auto box_path = [&](const Box3d& b, const char* color, double opacity) {
    const Vec2 fwd(std::cos(b.yaw), std::sin(b.yaw));
    const Vec2 left(-fwd.y(), fwd.x());
    const Vec2 c = b.center.head<2>();
    const double hl = 0.5 * b.size.y(), hw = 0.5 * b.size.x();
    const Vec2 pts[4] = {c + hl * fwd + hw * left, c + hl * fwd - hw * left,
                         c - hl * fwd - hw * left, c - hl * fwd + hw * left};
    std::string p = "<polygon fill=\"none\" stroke=\"" + std::string(color) +
                    "\" stroke-opacity=\"" + Num(opacity) + "\" points=\"";
    for (const Vec2& q : pts) p += Num(f.X(q.y())) + "," + Num(f.Y(q.x())) + " ";
    return p + "\"/>\n";
  };
  for (const Box3d& b : gt) s += box_path(b, "#2ca02c", 1.0);
  for (const Detection& d : dets) {
    if (d.score >= min_score) s += box_path(d.box, "#d62728", std::clamp(d.score, 0.2, 1.0));
  }
  return s + "</svg>\n";
}

}  // namespace radcam
