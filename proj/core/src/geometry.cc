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

#include "radcam/geometry.h"

#include <cmath>
#include <string>

#include <Eigen/Dense>

namespace radcam {

double WrapAngle(double angle) {
  if (angle > -kPi && angle <= kPi) return angle;
  double a = std::fmod(angle + kPi, 2.0 * kPi);
  if (a <= 0) a += 2.0 * kPi;
  return a - kPi;
}

void RigidTransform::Validate() const {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw GeometryError("rigid transform has non-finite entries");
  }
  const double err = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (err > 1e-9) {
    throw GeometryError("rotation is not orthonormal (deviation " + std::to_string(err) + ")");
  }
}

RigidTransform RigidTransform::FromYawTranslation(double yaw, const Vec3& translation) {
  RigidTransform t;
  const double c = std::cos(yaw), s = std::sin(yaw);
  t.rotation << c, -s, 0, s, c, 0, 0, 0, 1;
  t.translation = translation;
  return t;
}

void CameraModel::Validate() const {
  ego_to_camera.Validate();
  if (!(intrinsics(0, 0) > 0) || !(intrinsics(1, 1) > 0)) {
    throw GeometryError("camera focal lengths must be positive");
  }
  if (image_width <= 0 || image_height <= 0) throw GeometryError("camera image size");
  for (double s : feature_scale) {
    if (!(s > 0)) throw GeometryError("camera feature scale must be positive");
  }
}

CameraModel CameraModel::Looking(double yaw, const Vec3& mount, int width, int height,
                                 double hfov, std::vector<double> feature_scale) {
  CameraModel cam;
  const double f = 0.5 * width / std::tan(0.5 * hfov);
  cam.intrinsics << f, 0, 0.5 * width, 0, f, 0.5 * height, 0, 0, 1;
  const Vec3 forward(std::cos(yaw), std::sin(yaw), 0);
  const Vec3 right(std::sin(yaw), -std::cos(yaw), 0);
  const Vec3 down(0, 0, -1);
  cam.ego_to_camera.rotation.row(0) = right.transpose();
  cam.ego_to_camera.rotation.row(1) = down.transpose();
  cam.ego_to_camera.rotation.row(2) = forward.transpose();
  cam.ego_to_camera.translation = -(cam.ego_to_camera.rotation * mount);
  cam.image_width = width;
  cam.image_height = height;
  cam.feature_scale = std::move(feature_scale);
  return cam;
}

std::vector<CameraHit> ProjectToCameras(const Vec3& point, std::span<const CameraModel> cams,
                                        int level) {
  std::vector<CameraHit> hits;
  hits.reserve(cams.size());
  for (std::size_t i = 0; i < cams.size(); ++i) {
    const CameraModel& cam = cams[i];
    CameraHit hit;
    hit.camera = static_cast<int>(i);
    const Vec3 pc = cam.ego_to_camera.Apply(point);
    hit.depth = pc.z();
    if (pc.z() > kMinProjectionDepth) {
      const Vec3 h = cam.intrinsics * pc;
      hit.uv = Vec2(h.x() / h.z(), h.y() / h.z());
      hit.valid = hit.uv.x() >= 0 && hit.uv.x() < cam.image_width && hit.uv.y() >= 0 &&
                  hit.uv.y() < cam.image_height;
      if (level >= 0) {
        if (level >= static_cast<int>(cam.feature_scale.size())) {
          throw GeometryError("camera has no feature level " + std::to_string(level));
        }
        hit.uv *= cam.feature_scale[level];
      }
    }
    hits.push_back(hit);
  }
  return hits;
}

namespace {

int CellCount(double lo, double hi, double resolution) {
  const double n = (hi - lo) / resolution;
  const double rounded = std::round(n);
  if (!(resolution > 0) || std::abs(n - rounded) > 1e-9 || rounded < 1) {
    throw ConfigError("bev extent [" + std::to_string(lo) + ", " + std::to_string(hi) +
                      "] is not a whole number of " + std::to_string(resolution) + " m cells");
  }
  return static_cast<int>(rounded);
}

}  // namespace

int BevGridSpec::rows() const { return CellCount(x_min, x_max, resolution); }
int BevGridSpec::cols() const { return CellCount(y_min, y_max, resolution); }

void BevGridSpec::Validate(bool enforce_min_size) const {
  const int h = rows(), w = cols();
  if (enforce_min_size && (h < 8 || w < 8)) {
    throw ConfigError("bev grid must be at least 8x8 cells");
  }
  if (channels <= 0) throw ConfigError("bev channel count must be positive");
}

Vec2 BevGridSpec::CellCenter(int row, int col) const {
  return Vec2(x_min + (row + 0.5) * resolution, y_min + (col + 0.5) * resolution);
}

bool BevGridSpec::Contains(const Vec2& xy) const {
  return xy.x() >= x_min && xy.x() < x_max && xy.y() >= y_min && xy.y() < y_max;
}

std::optional<BevCell> BevCellOf(const Vec2& xy, const BevGridSpec& spec) {
  if (!spec.Contains(xy)) return std::nullopt;
  BevCell cell{static_cast<int>(std::floor((xy.x() - spec.x_min) / spec.resolution)),
               static_cast<int>(std::floor((xy.y() - spec.y_min) / spec.resolution))};
  // Rounding at the upper edge can land one past the last cell.
  if (cell.row >= spec.rows() || cell.col >= spec.cols()) return std::nullopt;
  return cell;
}

PolarCoord ToPolar(const Vec2& xy) {
  const double r = xy.norm();
  if (r == 0.0) return PolarCoord{0.0, 0.0};
  double az = std::atan2(xy.y(), xy.x());
  if (az == -kPi) az = kPi;
  return PolarCoord{r, az};
}

Vec2 FromPolar(const PolarCoord& polar) {
  return Vec2(polar.range * std::cos(polar.azimuth), polar.range * std::sin(polar.azimuth));
}

VelocityParts DecomposeVelocity(const Vec2& velocity, const Vec2& center) {
  const double n = center.norm();
  if (n < 1e-6) throw GeometryError("velocity decomposition at a degenerate center");
  const Vec2 dir = center / n;
  VelocityParts parts;
  parts.radial = velocity.dot(dir) * dir;
  parts.tangential = velocity - parts.radial;
  return parts;
}

}  // namespace radcam
